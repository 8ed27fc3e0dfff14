"""Mean return time: exact tower solve against a long orbit average."""
# %%
from fractions import Fraction

from betaswitch import BetaCtx, birkhoff_average, expected_return_time, multinacci

for k in (1, 2, 3):
    ctx = BetaCtx.of(multinacci(k))
    est = expected_return_time(ctx, 0, 30)
    # a rational start a little inside S; its orbit is generic enough
    x0 = Fraction(float(ctx.switch_lo)) + Fraction(1, 97)
    avg = birkhoff_average(ctx, 0, x0, 50_000)
    print(f"multinacci({k}): exact {float(est.exact):.6f}  orbit mean {float(avg):.4f}")

# %% for the golden ratio the exact value is beta + 2
golden = BetaCtx.of(multinacci(1))
print(expected_return_time(golden, 0).exact.same_as(golden.beta + 2))
