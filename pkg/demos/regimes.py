"""Marker constants and which regime a base falls in."""
# %%
from fractions import Fraction

from betaswitch import (BetaCtx, MarkerKind, check_hop, classify_beta, format_decimal,
                        m_membership, marker)

for k in range(1, 6):
    row = [format_decimal(marker(kind, k), 6) for kind in MarkerKind]
    print(k, *row)

# %% a few bases, with the orbit certificates behind each answer
for beta in ("1.7", "1.754", "1.8", "1.86", "1.93", "1.95"):
    ctx = BetaCtx.of(Fraction(beta))
    regime = classify_beta(ctx.beta)
    hop = check_hop(ctx, regime.k)
    mv = m_membership(ctx)
    print(f"{beta:6s} {regime!s:14s} jump={hop.jump!s:5s} closure={hop.closure!s:5s} "
          f"M: {mv.tag} after {mv.depth} forced steps")
