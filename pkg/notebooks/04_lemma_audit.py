# %% [markdown]
# # Auditing the per-class lemmas
#
# Each clause is evaluated on the sample grid. Slack is oriented so that a
# nonnegative value means the inequality holds.

# %%
from bianchi_lab import LemmaId, MetricState, integrate, sample_initial_states, verify_lemma

# %%
for lemma, t_end in [(LemmaId.L4_1, 20), (LemmaId.L5_1, 50), (LemmaId.L7_1, 50), (LemmaId.L8_1, 20)]:
    start = sample_initial_states(lemma.value, 1, seed=3)[0]
    report = verify_lemma(lemma, integrate(lemma.value, start, t_end))
    print(f"{lemma.name}: {'pass' if report.passed else 'FAIL'}")
    for clause in report.clauses:
        mark = " " if clause.passed else "!"
        print(f"  {mark} {clause.claim:52s} worst slack {clause.worst_slack:+.3e} at t={clause.worst_time:.2f}")

# %% [markdown]
# The E(1,1) upper bound on `A + B` decays like `1/t`. The lower bound on `B`
# in clause (1) already forces `A + B` to decay no faster than `t^(-1/2)`, so
# the upper bound fails once `t` is moderately large.

# %%
traj = integrate("e11", MetricState(1.0, 1.0, 1.0), 50.0)
a, b, _ = traj.y
for t in (1, 10, 50):
    i = int(t / traj.controls.sample_spacing)
    print(f"t={t:3d}  A+B={a[i] + b[i]:.4f}  bound={(2.0) / (1 + 8 / 3 * t):.4f}")
