"""Branches of the first-return map for the golden ratio.

Run with ``python3 demos/golden_return_map.py``.
"""
# %%
from betaswitch import BetaCtx, enumerate_branches, glst_verify, multinacci

ctx = BetaCtx.of(multinacci(1))  # golden ratio, S = [1/beta, 1]
print("S =", [round(v, 6) for v in (float(ctx.switch_lo), float(ctx.switch_hi))])

# %% every branch with omega = 0^inf is full: T0 once, then T1 until back in S
for b in enumerate_branches(ctx, 0, 8):
    lo, hi = b.domain.as_floats()
    print(f"t={b.return_time:2d}  word={b.word!s:9s}  ({lo:.6f}, {hi:.6f}]  full={b.full}")

# %% the uncovered part of S shrinks geometrically
for n in (4, 8, 16):
    rep = glst_verify(ctx, 0, n)
    print(n, rep.verdict, f"{float(rep.length_gap):.3e}", f"{float(ctx.beta) ** -(n + 1):.3e}")
