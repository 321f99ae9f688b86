"""Greedy expansions, the return-time partition, and the tower extension."""

import math

import pytest

from thermoform.beta import (
    GOLDEN,
    BetaSystem,
    ExtensionPoint,
    GlsPartition,
    analyze,
    beta_digits,
    expansion_of_one,
    first_return_time,
    gls_natural_extension,
    gls_partition_interval,
    golden_conjugacy_deviation,
    identity_check,
    induced_map_z0,
    is_admissible_beta,
    measured_return_time,
    natural_extension_step,
    t_beta,
)
from thermoform.errors import (
    BoundaryPointError,
    BudgetError,
    DomainError,
)
from thermoform.rng import task_rng

# greedy digits of 1 for beta = pi, recomputed by hand iteration of
# x -> frac(beta x) starting from 1
PI_DIGITS_OF_ONE = [3, 0, 1, 1, 0, 2, 1, 1, 1, 0, 0, 2]

BETAS = [GOLDEN, 1.8, math.pi]


# --- digits


def test_t_beta_basic():
    assert t_beta(2.0, 0.75) == pytest.approx(0.5)
    assert t_beta(10.0, 0.123) == pytest.approx(0.23, abs=1e-12)


def test_beta_digits_dyadic_sanity():
    # 11/16 is exact in binary, so the digit reads are too
    assert beta_digits(2.0, 0.6875, 4) == [1, 0, 1, 1]


def test_expansion_of_one_golden_is_finite():
    digits, finite = expansion_of_one(GOLDEN)
    assert finite
    assert digits == [1, 1]


def test_expansion_of_one_integer_base():
    digits, finite = expansion_of_one(2.0)
    assert finite
    assert digits == [2]


def test_expansion_of_one_pi_matches_hand_iteration():
    digits, finite = expansion_of_one(math.pi, k=12)
    assert not finite
    assert digits == PI_DIGITS_OF_ONE


@pytest.mark.parametrize("beta", BETAS)
def test_digits_of_one_reconstruct_one(beta):
    digits, finite = expansion_of_one(beta, k=16)
    total = sum(d * beta ** (-(j + 1)) for j, d in enumerate(digits))
    if finite:
        assert total == pytest.approx(1.0, abs=3e-16)
    else:
        # greedy truncations undershoot by at most one tail cell
        assert 0.0 < 1.0 - total < beta ** (-15)


def test_quasi_greedy_digits_golden():
    bs = BetaSystem(GOLDEN)
    # finite (1,1) turns into the periodic word (1,0) repeated
    assert [bs.quasi_greedy_digit(j) for j in range(1, 7)] == [1, 0, 1, 0, 1, 0]


def test_quasi_greedy_digits_integer_base():
    bs = BetaSystem(2.0)
    assert [bs.quasi_greedy_digit(j) for j in range(1, 5)] == [1, 1, 1, 1]


def test_tail_prefix_identity():
    for beta in BETAS:
        bs = BetaSystem(beta, depth=48)
        top = len(bs.digits) if bs.finite else 12
        for k in range(top + 1):
            lhs = bs.prefix_value(k) + beta ** (-k) * bs.tail(k)
            assert lhs == pytest.approx(1.0, abs=1e-12)


def test_admissibility_lexicographic_rule():
    assert is_admissible_beta(GOLDEN, [1, 0, 1, 0])
    assert not is_admissible_beta(GOLDEN, [1, 1])
    assert not is_admissible_beta(GOLDEN, [0, 1, 1, 0])
    assert is_admissible_beta(2.0, [1, 1, 1, 1])
    assert not is_admissible_beta(2.0, [2])
    assert is_admissible_beta(math.pi, [3, 0, 1, 1])
    assert not is_admissible_beta(math.pi, [3, 1])


def test_digit_budget_is_hard():
    bs = BetaSystem(math.pi, depth=4, max_depth=4)
    bs.digit(4)
    with pytest.raises(BudgetError):
        bs.digit(5)


# --- partition


@pytest.mark.parametrize("beta", BETAS)
def test_cells_tile_left_to_right(beta):
    part = GlsPartition(BetaSystem(beta, depth=64))
    cells = part.cells_up_to(40)
    assert cells[0].left == 0.0
    for a, b in zip(cells, cells[1:]):
        assert b.left == pytest.approx(a.right, abs=1e-14)
        assert a.length == pytest.approx(beta ** (-(a.k + 1)), abs=1e-15)


def test_partition_coverage_approaches_one():
    part = GlsPartition(BetaSystem(math.pi, depth=64))
    c10, c40 = part.coverage(10), part.coverage(40)
    assert c10 < c40 <= 1.0 + 1e-12
    assert c40 > 0.999


def test_golden_partition_is_two_cells():
    part = GlsPartition(BetaSystem(GOLDEN))
    assert part.total_cells == 2
    (l0, r0), k0, _ = gls_partition_interval(GOLDEN, 1)
    (l1, r1), k1, _ = gls_partition_interval(GOLDEN, 2)
    assert (l0, k0) == (0.0, 0)
    assert r0 == pytest.approx(1 / GOLDEN, abs=1e-15)
    assert l1 == pytest.approx(1 / GOLDEN, abs=1e-15)
    assert r1 == pytest.approx(1.0, abs=1e-15)
    assert k1 == 1
    with pytest.raises(DomainError):
        part.cell(3)


@pytest.mark.parametrize("beta", [1.8, math.pi])
def test_locate_round_trips_cell_interiors(beta):
    part = GlsPartition(BetaSystem(beta, depth=64))
    checked = 0
    for n in range(1, 41):
        cell = part.cell(n)
        if cell.length < 1e-9:
            continue  # interior offsets thinner than float spacing near 1
        for u in (0.31, 0.77):
            found = part.locate(cell.left + u * cell.length)
            assert found.n == n
        checked += 1
    assert checked >= 15


def test_locate_flags_cell_boundaries():
    part = GlsPartition(BetaSystem(GOLDEN))
    with pytest.raises((BoundaryPointError, DomainError)):
        part.locate(1 / GOLDEN)


def test_locate_rejects_outside_domain():
    part = GlsPartition(BetaSystem(1.8))
    with pytest.raises(DomainError):
        part.locate(-0.1)
    with pytest.raises(DomainError):
        part.locate(1.0)


# --- tower map


def test_tower_climb_and_drop_golden():
    bs = BetaSystem(GOLDEN)
    # x in the right cell rides the expansion of 1 for one step
    p = natural_extension_step(bs, ExtensionPoint(0.7, 0.3, 0))
    assert p.level == 1
    assert p.y == pytest.approx(0.3 / GOLDEN, abs=1e-15)
    # from floor 1 the only digits are 0 (drop) since b_2 = 1 needs x >= tail
    q = natural_extension_step(bs, p)
    assert q.level in (0, 2)


def test_tower_drop_lands_on_cell_left():
    # starting from (x, 0) with x in cell n, the orbit climbs k floors and
    # drops once; the landing y is exactly the left endpoint of cell n
    bs = BetaSystem(1.8, depth=48)
    part = GlsPartition(bs)
    for n in range(1, 21):
        cell = part.cell(n)
        x = cell.left + 0.4 * cell.length
        p = ExtensionPoint(x, 0.0, 0)
        steps = 0
        while True:
            p = natural_extension_step(bs, p)
            steps += 1
            if p.level == 0:
                break
        assert steps == cell.return_time
        assert p.y == pytest.approx(cell.left, abs=1e-11)


@pytest.mark.parametrize("beta", BETAS)
def test_identity_of_tower_and_affine_routes(beta):
    assert identity_check(beta, sample_size=2000, seed=1) < 1e-11


def test_identity_check_accepts_prebuilt_system():
    bs = BetaSystem(1.8, depth=64)
    assert identity_check(bs, sample_size=500, seed=2) < 1e-11


def test_induced_map_matches_affine_form():
    bs = BetaSystem(math.pi, depth=64)
    part = GlsPartition(bs)
    rng = task_rng(5)
    for _ in range(40):
        x, y = rng.random(), rng.random()
        a = induced_map_z0(bs, x, y)
        b = gls_natural_extension(part, x, y)
        assert a[0] == pytest.approx(b[0], abs=1e-11)
        assert a[1] == pytest.approx(b[1], abs=1e-11)


def test_golden_conjugacy_deviation_small():
    assert golden_conjugacy_deviation(sample_size=1024, seed=0) < 1e-12


# --- return times


@pytest.mark.parametrize("beta", BETAS)
def test_measured_return_time_equals_cell_return(beta):
    bs = BetaSystem(beta, depth=1 << 12, max_depth=1 << 14)
    part = GlsPartition(bs)
    total = part.total_cells
    for n in range(1, 61):
        if total is not None and n > total:
            break
        cell = part.cell(n)
        assert measured_return_time(bs, n) == cell.return_time
        assert measured_return_time(bs, n, u=0.81) == cell.return_time


def test_first_return_time_agrees_on_shallow_cells():
    bs = BetaSystem(1.8, depth=256)
    part = GlsPartition(bs)
    for n in range(1, 15):
        cell = part.cell(n)
        x = cell.left + 0.37 * cell.length
        assert first_return_time(bs, x, 0.4) == cell.return_time


def test_first_return_budget():
    bs = BetaSystem(1.8, depth=256)
    part = GlsPartition(bs)
    cell = part.cell(12)
    with pytest.raises(BudgetError):
        first_return_time(bs, cell.left + 0.37 * cell.length, 0.4,
                          budget=cell.return_time - 1)


# --- analyze bundle


def test_analyze_summary_shape():
    out = analyze(1.8, depth=32, identity_samples=400, partition_cells=12, seed=0)
    assert out["beta"] == 1.8
    assert not out["finite"]
    assert len(out["partition"]) == 12
    assert 0.9 < out["partition_coverage"] <= 1.0
    assert out["identity_check"] < 1e-11


def test_analyze_depth_budget_raises():
    with pytest.raises(BudgetError):
        analyze(math.pi, depth=4)
