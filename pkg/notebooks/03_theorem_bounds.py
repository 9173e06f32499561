# %% [markdown]
# # Closed-form bounds against the numeric envelope
#
# Every class except the flat one has explicit lower and upper bounds on the
# eigenvalue after `tau`. The numeric envelope is the tightest bound the
# reaction coefficients allow, so the closed forms should contain it.

# %%
import numpy as np

from bianchi_lab import (
    MetricState,
    TheoremBoundParams,
    detect_tau,
    envelope_integrate,
    integrate,
    sample_initial_states,
    theorem_bounds,
)

# %%
for name, t_end in [("su2", 20), ("sl2r", 50), ("heisenberg", 50), ("e11", 50), ("e2", 20)]:
    traj = integrate(name, sample_initial_states(name, 1, seed=7)[0], t_end)
    tau = detect_tau(name, traj, with_relaxations=True).tau
    env = envelope_integrate(traj, tau)
    lo, hi = theorem_bounds(TheoremBoundParams.from_trajectory(traj, tau), traj.t_end)
    print(f"{name:10s} tau={tau:5.2f}  lo={lo:.4e} <= L={env.lower[-1]:.4e}"
          f"   U={env.upper[-1]:.4e} <= hi={hi:.4e}")

# %% [markdown]
# For Heisenberg the upper bound can be compared with the exact integral. The
# display with coefficient `A0/4` falls below the envelope. The exact
# coefficient `3 A0 / 4` matches it.

# %%
unit = MetricState(1.0, 1.0, 1.0)
traj = integrate("heisenberg", unit, 100.0)
env = envelope_integrate(traj, 0.0)
params = TheoremBoundParams.from_trajectory(traj, 0.0)
exact_hi = theorem_bounds(params, env.t).hi
printed_hi = theorem_bounds(params, env.t, as_printed=True).hi
print("exact coefficient, max rel. gap :", np.max(np.abs(env.upper / exact_hi - 1)))
print("printed coefficient, max rel. gap:", np.max(np.abs(env.upper / printed_hi - 1)))
