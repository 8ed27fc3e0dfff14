"""Which sequences of return times can a point of S produce?"""
# %%
from fractions import Fraction

from betaswitch import (BetaCtx, OmegaSource, certify_impossible_constant,
                        realize_exists_omega, realize_fixed_omega, return_sequence)

ctx = BetaCtx.of(Fraction(9, 5))
omega, times = (0, 1, 0, 0, 1), (3, 7, 4, 3, 5)
tree = realize_fixed_omega(ctx, omega, times)
x, prefix = tree.witness()
print("leaves per level:", tree.leaf_counts())
print("witness", float(x), "replays to",
      [r.time for r in return_sequence(ctx, OmegaSource.fixed(prefix), x, len(times))])

# %% just below alpha_2 a return time of 2 cannot be followed by 3
near = BetaCtx.of(Fraction(1754, 1000))
for j in range(2, 7):
    print((2, j), realize_exists_omega(near, (2, j)).nonempty)

# %% in a gap regime some constant sequences die out quickly
print(certify_impossible_constant(BetaCtx.of(Fraction(186, 100)), 3, 0))
