import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from betaswitch import (BetaCtx, CapExceeded, NoReturnWithinCap, OmegaSource,
                        certify_impossible_constant, min_return_time, realize_exists_omega,
                        realize_fixed_omega, return_sequence)
from betaswitch.realizability import union_components
from betaswitch.return_map import Itv, switch_region

B18 = BetaCtx.of(Fraction(9, 5))


def _times(ctx, omega, x, n, cap=40):
    try:
        return tuple(r.time for r in return_sequence(ctx, OmegaSource.fixed(omega), x, n, cap))
    except NoReturnWithinCap:
        return None


def _grid(ctx, n_points):
    lo, width = ctx.switch_lo.exact, ctx.switch_width.exact
    return [lo + width * Fraction(i, n_points) for i in range(n_points + 1)]


def test_examples(golden):
    assert realize_fixed_omega(B18, (0, 1, 0), (3, 4, 5)).nonempty
    assert not realize_fixed_omega(golden, (0, 0), (1, 1)).nonempty
    empty = realize_fixed_omega(golden, (), ())
    assert empty.nonempty and empty.components(golden)[0].key == switch_region(golden).key
    m = min_return_time(B18)
    assert realize_exists_omega(B18, (m,)).nonempty


def test_argument_errors():
    with pytest.raises(ValueError):
        realize_fixed_omega(B18, (0,), (3, 4))
    with pytest.raises(ValueError):
        realize_fixed_omega(B18, (2,), (3,))
    with pytest.raises(ValueError):
        realize_exists_omega(B18, (0,))
    with pytest.raises(CapExceeded):
        realize_exists_omega(B18, (3, 70))
    with pytest.raises(ValueError):
        realize_fixed_omega(B18, (0,), (3,)).components(B18)


@pytest.mark.parametrize("beta, omega, times", [
    (Fraction(9, 5), (0, 1), (3, 4)),
    (Fraction(9, 5), (1, 1), (3, 3)),
    (Fraction(9, 5), (0, 0, 1), (4, 3, 5)),
    (Fraction(186, 100), (0, 1), (3, 4)),
    (Fraction(193, 100), (1, 0), (4, 5)),
    (Fraction(1754, 1000), (0, 0), (2, 4)),
])
def test_components_match_pointwise_oracle(beta, omega, times):
    ctx = BetaCtx.of(beta)
    comps = realize_fixed_omega(ctx, omega, times, explicit=True).components(ctx)
    for x in _grid(ctx, 2500):
        inside = any(c.contains(x) for c in comps)
        assert inside == (_times(ctx, omega, x, len(times)) == times), x


def test_components_match_exists_oracle():
    ctx = BetaCtx.of(Fraction(186, 100))
    times = (2, 3)
    comps = realize_exists_omega(ctx, times, explicit=True).components(ctx)
    omegas = list(itertools.product((0, 1), repeat=len(times)))
    for x in _grid(ctx, 1000):
        hit = any(_times(ctx, w, x, len(times)) == times for w in omegas)
        assert any(c.contains(x) for c in comps) == hit, x


def test_levels_are_nested():
    tree = realize_fixed_omega(B18, (0, 1, 1, 0), (3, 5, 4, 3), explicit=True)
    prev = [switch_region(B18)]
    for level in tree.levels:
        for leaf in level.leaves:
            d = leaf.domain
            assert any(p.contains(d.lo) or p.contains(d.hi) or p.contains(d.midpoint)
                       for p in prev)
            assert any(p.contains(d.midpoint) for p in prev)
        prev = [leaf.domain for leaf in level.leaves]


def test_merged_and_explicit_agree():
    omega, times = (1, 0, 1), (4, 3, 6)
    merged = realize_fixed_omega(B18, omega, times)
    explicit = realize_fixed_omega(B18, omega, times, explicit=True)
    assert merged.leaf_counts() == explicit.leaf_counts()
    assert [lv.covering for lv in merged.levels] == [lv.covering for lv in explicit.levels]


def test_fullness_transport():
    # below gamma_k every prescribed prefix keeps covering S
    rng = random.Random(3)
    for _ in range(100):
        omega = tuple(rng.randint(0, 1) for _ in range(8))
        times = tuple(rng.randint(3, 9) for _ in range(8))
        tree = realize_fixed_omega(B18, omega, times)
        assert all(lv.covering for lv in tree.levels), (omega, times)


@settings(max_examples=40)
@given(st.lists(st.tuples(st.integers(0, 1), st.integers(3, 8)), min_size=1, max_size=5))
def test_witness_replays(pairs):
    omega, times = zip(*pairs)
    tree = realize_fixed_omega(B18, omega, times)
    assert tree.nonempty
    x, prefix = tree.witness()
    assert prefix == omega
    assert _times(B18, omega, x, len(times)) == times


@settings(max_examples=40)
@given(st.sampled_from([Fraction(186, 100), Fraction(1754, 1000), Fraction(193, 100)]),
       st.lists(st.integers(2, 6), min_size=1, max_size=3))
def test_exists_is_union_of_fixed(beta, times):
    ctx = BetaCtx.of(beta)
    exists = realize_exists_omega(ctx, times)
    fixed = [realize_fixed_omega(ctx, w, times).nonempty
             for w in itertools.product((0, 1), repeat=len(times))]
    assert exists.nonempty == any(fixed)
    if exists.nonempty:
        x, prefix = exists.witness()
        assert _times(ctx, prefix, x, len(times)) == tuple(times)


def test_exists_examples():
    ctx = BetaCtx.of(Fraction(1754, 1000))
    assert not realize_exists_omega(ctx, (2, 3)).nonempty
    assert realize_exists_omega(ctx, (2, 2)).nonempty
    assert realize_exists_omega(ctx, (2, 4)).nonempty


def test_thm_exists_regime_covers():
    ctx = BetaCtx.of(Fraction(193, 100))
    rng = random.Random(11)
    for _ in range(10):
        times = tuple(rng.randint(4, 7) for _ in range(6))
        tree = realize_exists_omega(ctx, times)
        assert tree.nonempty and all(lv.covering for lv in tree.levels), times


def test_certify_impossible(golden):
    v = certify_impossible_constant(golden, 1, 0)
    assert (v.tag, v.depth) == ("ImpossibleAtDepth", 2)
    v = certify_impossible_constant(BetaCtx.of(Fraction(186, 100)), 3, 0)
    assert v.impossible and v.depth == 2
    v = certify_impossible_constant(B18, 3, 0)
    assert not v.impossible and v.depth == 16
    with pytest.raises(ValueError):
        certify_impossible_constant(B18, 3, 2)


def test_union_components():
    a = Itv.make(0, 1, True, False)
    b = Itv.make(1, 2, True, True)
    c = Itv.make(3, 4, False, True)
    merged = union_components([c, b, a])
    assert len(merged) == 2
    assert merged[0].lo.exact == 0 and merged[0].hi.exact == 2
    gap = union_components([Itv.make(0, 1, True, False), Itv.make(1, 2, False, True)])
    assert len(gap) == 2
