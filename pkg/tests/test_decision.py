import json
import math

import numpy as np
import pytest

from tbm_advisor import DomainError, InvalidInputError
from tbm_advisor import datagen, decision, mapping, physics
from tbm_advisor.decision import (
    CostModel,
    DecisionContext,
    GridSpec,
    RatedLimits,
    dumps_document,
    feasible_region,
    optimize,
    penetration_rate,
    total_cost,
    write_region_csv,
)


def make_context(ucs=100.0, **kw):
    base = dict(
        ucs=ucs, rqd=60.0, cai=3.0, d_avg=15.0, ci=380.0,
        peak_acc=2.2, main_freq=113.0,
    )
    base.update(kw)
    return DecisionContext(**base)


def stub_model():
    return mapping.PhysicsOnlyModel(hf_value=500.0, pb_value=0.0)


# ---------------------------------------------------------------------------
# grid


def test_default_grid_shape():
    g = GridSpec()
    assert len(g.rpm_values()) == 101
    assert len(g.p_values()) == 17
    region = feasible_region(stub_model(), physics.default_rules(), make_context())
    assert region.n_cells == 1717


def test_grid_values_are_exact():
    rpm = GridSpec().rpm_values()
    # accumulated float steps would give 0.30000000000000004 here
    assert rpm[3] == 0.3
    assert rpm[7] == 0.7
    assert rpm[-1] == 10.0
    p = GridSpec().p_values()
    assert p[0] == 0.0 and p[-1] == 16.0


def test_grid_endpoint_not_a_multiple_of_step():
    g = GridSpec(rpm_min=0.0, rpm_max=1.05, rpm_step=0.5)
    assert list(g.rpm_values()) == [0.0, 0.5, 1.0]


def test_grid_validation():
    with pytest.raises(InvalidInputError):
        GridSpec(rpm_step=0.0)
    with pytest.raises(InvalidInputError):
        GridSpec(p_min=5.0, p_max=4.0)


def test_cells_are_rpm_major():
    grid = GridSpec(rpm_min=1.0, rpm_max=2.0, rpm_step=1.0,
                    p_min=0.0, p_max=2.0, p_step=1.0)
    region = feasible_region(
        stub_model(), physics.default_rules(), make_context(), grid=grid
    )
    assert list(region.rpm) == [1.0, 1.0, 1.0, 2.0, 2.0, 2.0]
    assert list(region.p) == [0.0, 1.0, 2.0, 0.0, 1.0, 2.0]


# ---------------------------------------------------------------------------
# limits, cost model, context


def test_limit_caps():
    lim = RatedLimits()
    assert lim.thrust_cap == pytest.approx(12000.0)
    assert lim.torque_cap == pytest.approx(1512.0)
    with pytest.raises(InvalidInputError):
        RatedLimits(safety_factor_thrust=1.2)
    with pytest.raises(InvalidInputError):
        RatedLimits(belt_rated=0.0)
    with pytest.raises(InvalidInputError):
        RatedLimits.from_dict({"thrust_rated": 1.0, "bogus": 2.0})


def test_cost_model_validation():
    with pytest.raises(InvalidInputError):
        CostModel(utilization=0.0)
    with pytest.raises(InvalidInputError):
        CostModel(utilization=1.5)
    with pytest.raises(InvalidInputError):
        CostModel(c1=-1.0)
    cm = CostModel.from_dict(CostModel().to_dict())
    assert cm == CostModel()


def test_context_round_trip_and_validation():
    ctx = make_context()
    assert DecisionContext.from_dict(ctx.to_dict()) == ctx
    with pytest.raises(InvalidInputError):
        DecisionContext.from_dict({"ucs": 100.0})
    with pytest.raises(InvalidInputError):
        DecisionContext.from_dict({**ctx.to_dict(), "extra": 1.0})
    with pytest.raises(InvalidInputError):
        make_context(ucs=float("nan"))


def test_feature_matrix_layout():
    ctx = make_context(ucs=77.0, rqd=40.0)
    X = ctx.feature_matrix(np.array([3.0]), np.array([5.0]))
    assert X.shape == (1, 9)
    assert list(X[0]) == [3.0, 5.0, 77.0, 40.0, 3.0, 15.0, 380.0, 2.2, 113.0]


# ---------------------------------------------------------------------------
# cost arithmetic


def test_penetration_rate():
    assert penetration_rate(0.0, 7.5) == 0.0
    assert penetration_rate(5.0, 6.0) == 30.0
    with pytest.raises(InvalidInputError):
        penetration_rate(float("inf"), 1.0)


def test_cost_reference_values():
    cm = CostModel()
    cb = total_cost(60.0, 500.0, cm)
    # 20000 / (0.5 * 24 * 3.6) and 15000 * 9 pi / 500
    assert cb.c_s == pytest.approx(462.96296296296293, rel=1e-12)
    assert cb.c_c == pytest.approx(848.2300164692441, rel=1e-12)
    assert cb.c_t == cb.c_s + cb.c_c


def test_cost_reciprocal_scaling():
    cm = CostModel()
    base = total_cost(30.0, 400.0, cm)
    assert total_cost(60.0, 400.0, cm).c_s == pytest.approx(base.c_s / 2, rel=1e-12)
    assert total_cost(30.0, 800.0, cm).c_c == pytest.approx(base.c_c / 2, rel=1e-12)


def test_cost_sentinels():
    cm = CostModel()
    assert total_cost(0.0, 500.0, cm).c_s == math.inf
    assert total_cost(0.0, 500.0, cm).c_t == math.inf
    assert total_cost(30.0, 0.0, cm).c_c == math.inf
    assert total_cost(30.0, -5.0, cm).c_c == math.inf
    assert math.isfinite(total_cost(30.0, 0.1, cm).c_t)


# ---------------------------------------------------------------------------
# feasibility


def test_region_masks_match_scalar_rules():
    rules = physics.default_rules()
    ctx = make_context(ucs=100.0)
    region = feasible_region(stub_model(), rules, ctx)
    lim = RatedLimits()
    p_min = physics.critical_penetration(rules.cp, 100.0, 78.0)
    assert region.p_min_mm == pytest.approx(p_min)
    for i in range(0, region.n_cells, 97):
        th = physics.cutterhead_thrust(rules, 100.0, region.p[i])
        tor = physics.cutterhead_torque(rules, 100.0, region.p[i])
        assert region.thrust_ok[i] == (th <= lim.thrust_cap)
        assert region.torque_ok[i] == (tor <= lim.torque_cap)
        assert region.belt_ok[i]  # stub predicts zero belt volume
        assert region.cp_ok[i] == (region.p[i] >= p_min)
        assert region.feasible[i] == (
            region.thrust_ok[i] and region.torque_ok[i]
            and region.belt_ok[i] and region.cp_ok[i]
        )


def test_huge_limits_make_machine_masks_vacuous():
    lim = RatedLimits(thrust_rated=1e12, torque_rated=1e12, belt_rated=1e12,
                      safety_factor_thrust=1.0, safety_factor_torque=1.0)
    region = feasible_region(
        stub_model(), physics.default_rules(), make_context(), limits=lim
    )
    assert region.thrust_ok.all()
    assert region.torque_ok.all()
    assert region.belt_ok.all()
    # the chip-formation rule is untouched by machine ratings
    assert not region.cp_ok.all()


def test_enlarging_limits_grows_feasible_set():
    rules = physics.default_rules()
    small = RatedLimits()
    big = RatedLimits(safety_factor_thrust=0.8, safety_factor_torque=0.8,
                      belt_rated=1200.0)
    for ucs in (60.0, 100.0, 140.0):
        ctx = make_context(ucs=ucs)
        fs = feasible_region(stub_model(), rules, ctx, limits=small).feasible
        fb = feasible_region(stub_model(), rules, ctx, limits=big).feasible
        assert (fs <= fb).all()


def test_out_of_rule_domain_context_raises():
    with pytest.raises(DomainError):
        feasible_region(stub_model(), physics.default_rules(), make_context(ucs=600.0))


# ---------------------------------------------------------------------------
# optimization


def test_stub_optimum_mid_strength_rock():
    # at 100 MPa the torque cap trims penetration to 6 mm/r and the cheapest
    # feasible cell is the fastest one
    res = optimize(stub_model(), physics.default_rules(), make_context(ucs=100.0))
    assert res.status == "optimal"
    assert res.p == 6.0
    assert res.rpm == 10.0
    assert res.pr == pytest.approx(60.0)
    assert res.feasible_count == 202  # p in {5, 6} x 101 rpm levels
    assert res.cost.c_s == pytest.approx(462.96296296296293, rel=1e-12)
    assert res.cost.c_c == pytest.approx(848.2300164692441, rel=1e-12)
    assert res.predicted["th"] == pytest.approx(38 * 199.68, rel=1e-9)


def test_stub_optimum_soft_rock_uses_full_penetration():
    res = optimize(stub_model(), physics.default_rules(), make_context(ucs=50.0))
    assert res.status == "optimal"
    assert res.p == 16.0 and res.rpm == 10.0


def test_stub_infeasible_hard_rock():
    res = optimize(stub_model(), physics.default_rules(), make_context(ucs=150.0))
    assert res.status == "infeasible"
    assert res.p is None and res.rpm is None and res.cost is None
    assert res.feasible_count == 0
    # every cell fails at least one constraint
    assert res.eliminated["torque"] > 0 and res.eliminated["cp"] > 0


def brute_force(model, rules, ctx, limits, cm, grid):
    """Independent scan: python loops, scalar cost calls, explicit tie rule."""
    rpm_values = grid.rpm_values()
    p_values = grid.p_values()
    X = ctx.feature_matrix(
        np.tile(p_values, len(rpm_values)), np.repeat(rpm_values, len(p_values))
    )
    pred = model.predict(X)
    p_min = physics.critical_penetration(rules.cp, ctx.ucs, rules.layout.nominal_spacing_mm)
    best = None
    for i, rpm in enumerate(rpm_values):
        for j, p in enumerate(p_values):
            hf, th, tor, pb = pred[i * len(p_values) + j]
            if th > limits.thrust_cap or tor > limits.torque_cap:
                continue
            if pb > limits.belt_rated or p < p_min:
                continue
            c_t = total_cost(penetration_rate(p, rpm), hf, cm).c_t
            if not math.isfinite(c_t):
                continue
            if best is None or c_t < best[0]:
                best = (c_t, float(rpm), float(p))
    return best


def test_optimize_matches_brute_force_stub():
    rules = physics.default_rules()
    lim, cm, grid = RatedLimits(), CostModel(), GridSpec()
    for ucs in (50.0, 80.0, 100.0, 120.0, 150.0):
        ctx = make_context(ucs=ucs)
        res = optimize(stub_model(), rules, ctx)
        expect = brute_force(stub_model(), rules, ctx, lim, cm, grid)
        if expect is None:
            assert res.status == "infeasible"
        else:
            assert res.status == "optimal"
            assert (res.cost.c_t, res.rpm, res.p) == expect


def test_optimize_matches_brute_force_trained_model():
    cfg = datagen.GenConfig(sample_count=80, seed=5)
    dataset = datagen.generate_dataset(cfg)
    hp = mapping.Hyperparams(h1=12, h2=12, alpha=0.003, epochs=60,
                             batch_size=16, seed=4)
    model, _ = mapping.train(dataset, hp, train_count=70, test_count=0)
    rules = physics.default_rules()
    lim = RatedLimits()
    cm = CostModel()
    grid = GridSpec()
    for ucs in (60.0, 90.0, 125.0):
        ctx = make_context(ucs=ucs)
        res = optimize(model, rules, ctx, lim, cm, grid)
        expect = brute_force(model, rules, ctx, lim, cm, grid)
        if expect is None:
            assert res.status == "infeasible"
        else:
            assert res.status == "optimal"
            assert res.cost.c_t == expect[0]
            assert (res.rpm, res.p) == (expect[1], expect[2])


class _BeltTieModel:
    """Flat thrust/torque/life; belt volume 10*p*rpm so equal-advance cells
    cost exactly the same and the cap trims the fast corner."""

    def predict(self, X):
        X = np.asarray(X, dtype=float)
        n = len(X)
        return np.column_stack([
            np.full(n, 500.0), np.zeros(n), np.zeros(n),
            10.0 * X[:, 0] * X[:, 1],
        ])


def test_tie_breaks_toward_lower_rpm():
    base = physics.default_rules()
    rules = physics.PhysicsRules(
        fn=base.fn, fr=base.fr, cp=base.cp,
        layout=physics.CutterLayout(radii_m=base.layout.radii_m,
                                    nominal_spacing_mm=20.0),
    )
    grid = GridSpec(rpm_min=1.0, rpm_max=3.0, rpm_step=1.0,
                    p_min=2.0, p_max=6.0, p_step=2.0)
    lim = RatedLimits(belt_rated=120.0)
    res = optimize(_BeltTieModel(), rules, make_context(ucs=30.0),
                   limits=lim, grid=grid)
    # (rpm=2, p=6) and (rpm=3, p=4) tie at pr = 12; lower rpm wins
    assert res.status == "optimal"
    assert (res.rpm, res.p) == (2.0, 6.0)
    region = res.region
    tied = [i for i in range(region.n_cells)
            if region.feasible[i] and region.p[i] * region.rpm[i] == 12.0]
    assert len(tied) == 2
    assert res.costs[tied[0]] == res.costs[tied[1]]


def test_zero_limits_never_feasible():
    lim = RatedLimits(thrust_rated=1e-6, torque_rated=1e-6, belt_rated=1e-6)
    res = optimize(stub_model(), physics.default_rules(), make_context())
    assert res.status == "optimal"  # sanity: same call is feasible by default
    res = optimize(stub_model(), physics.default_rules(), make_context(), limits=lim)
    assert res.status == "infeasible"
    assert res.eliminated["thrust"] == 1717


# ---------------------------------------------------------------------------
# documents and CSV


def test_document_shape_and_determinism():
    res = optimize(stub_model(), physics.default_rules(), make_context(ucs=100.0))
    doc = res.to_document()
    assert doc["status"] == "optimal"
    assert doc["optimum"] == {"p": 6.0, "rpm": 10.0}
    assert set(doc["cost"]) == {"c_s", "c_c", "c_t"}
    assert len(doc["grid"]["cells"]) == 1717
    cell = doc["grid"]["cells"][0]  # rpm=0, p=0: standstill
    assert cell["cost"] is None
    assert set(cell["mask"]) == {"thrust", "torque", "belt", "cp"}
    again = optimize(stub_model(), physics.default_rules(), make_context(ucs=100.0))
    assert dumps_document(doc) == dumps_document(again.to_document())
    slim = res.to_document(include_grid=False)
    assert "grid" not in slim
    json.loads(dumps_document(doc))  # canonical string is valid strict JSON


def test_infeasible_document_uses_nulls():
    res = optimize(stub_model(), physics.default_rules(), make_context(ucs=150.0))
    doc = res.to_document(include_grid=False)
    assert doc["optimum"] is None
    assert doc["predicted"] is None
    assert doc["cost"] is None
    assert doc["feasible_count"] == 0
    json.loads(dumps_document(doc))


def test_region_csv(tmp_path):
    res = optimize(stub_model(), physics.default_rules(), make_context(ucs=100.0))
    path = tmp_path / "region.csv"
    write_region_csv(res, path)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "rpm,p,th,tor,hf,pb,feasible,cost"
    assert len(lines) == 1 + 1717
    first = lines[1].split(",")
    assert first[0] == "0.0" and first[1] == "0.0"
    assert first[-1] == "inf"  # standstill cell carries the sentinel
    # a feasible moving cell round-trips its cost
    idx = int(np.argmin(np.where(res.region.feasible, res.costs, np.inf)))
    row = lines[1 + idx].split(",")
    assert row[6] == "1"
    assert float(row[7]) == res.cost.c_t
