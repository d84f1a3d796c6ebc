"""Generator determinism, knob semantics, and price/power/fare scaling."""

from __future__ import annotations

import json

import pytest

from v2groute.generate import (
    GenParams,
    InvalidParams,
    PERIODS,
    RIDE_BUCKETS,
    fit_discharge_template,
    generate,
    scale_prices,
    tou_charge_template,
)
from v2groute.io import instance_to_json
from v2groute.model import EMPTY_SCHEDULE, GRID_STATION, Horizon
from v2groute.simulate import is_feasible


def test_seeded_generation_is_byte_identical():
    params = GenParams(seed=42, n_orders=20, n_stations=4)
    a = json.dumps(instance_to_json(generate(params)))
    b = json.dumps(instance_to_json(generate(params)))
    assert a == b


def test_different_seeds_differ():
    a = generate(GenParams(seed=1, n_orders=10, n_stations=2))
    b = generate(GenParams(seed=2, n_orders=10, n_stations=2))
    assert a != b


@pytest.mark.parametrize("bucket", list(RIDE_BUCKETS))
def test_ride_length_bucket_respected(bucket):
    lo, hi = RIDE_BUCKETS[bucket]
    inst = generate(GenParams(seed=5, n_orders=40, n_stations=2, ride_length_bucket=bucket))
    for o in inst.orders:
        assert lo <= o.service_distance_km <= hi


@pytest.mark.parametrize("period", list(PERIODS))
def test_period_bounds_windows(period):
    p0, p1 = PERIODS[period]
    inst = generate(GenParams(seed=6, n_orders=40, n_stations=2, period=period))
    for o in inst.orders:
        assert p0 <= o.window_start_min < o.window_end_min <= p1


def test_orders_completable_and_instance_valid():
    inst = generate(GenParams(seed=7, n_orders=50, n_stations=5))
    assert is_feasible(EMPTY_SCHEDULE, inst)
    for o in inst.orders:
        assert o.window_start_min + o.service_time_min <= o.window_end_min


def test_home_stations_fixed_power_and_prices():
    inst = generate(GenParams(seed=8, n_orders=5, n_stations=3))
    ctx = inst.context()
    horizon = Horizon(15)
    assert ctx.home_source.power_kw == 7.0
    assert ctx.home_source.tariff.charge_price == tou_charge_template(horizon)
    assert ctx.home_destination.tariff.discharge_price == fit_discharge_template(horizon)
    # Grid tariffs are jittered templates: within [0.9, 1.1] of the base.
    for s in inst.stations:
        if s.kind == GRID_STATION:
            ratio = s.tariff.charge_price[0] / tou_charge_template(horizon)[0]
            assert 0.9 <= ratio <= 1.1


def test_tariff_templates_exact_values():
    horizon = Horizon(15)
    tou = tou_charge_template(horizon)
    fit = fit_discharge_template(horizon)
    as_slot = lambda minute: minute // 15
    assert tou[as_slot(960)] == 0.412  # 4 pm, inside 3-9 pm peak
    assert tou[as_slot(300)] == 0.2665  # 5 am off-peak
    assert fit[as_slot(1020)] == 0.117  # 5 pm feed-in peak
    assert fit[as_slot(660)] == 0.043  # 11 am off-peak
    assert fit[as_slot(120)] == 0.061  # 2 am shoulder


def test_scale_identity():
    inst = generate(GenParams(seed=9, n_orders=5, n_stations=2))
    assert scale_prices(inst, 1.0, 1.0, 1.0) == inst


def test_scale_prices_triple():
    inst = generate(GenParams(seed=9, n_orders=5, n_stations=2))
    scaled = scale_prices(inst, 3.0, 3.0, 1.0)
    for s0, s1 in zip(inst.stations, scaled.stations):
        assert s1.power_kw == pytest.approx(3.0 * s0.power_kw)
        for p0, p1 in zip(s0.tariff.charge_price, s1.tariff.charge_price):
            assert p1 == pytest.approx(3.0 * p0)
        for p0, p1 in zip(s0.tariff.discharge_price, s1.tariff.discharge_price):
            assert p1 == pytest.approx(3.0 * p0)
    for o0, o1 in zip(inst.orders, scaled.orders):
        assert o1.fare == o0.fare


def test_scale_fares_half():
    inst = generate(GenParams(seed=9, n_orders=5, n_stations=2))
    scaled = scale_prices(inst, 1.0, 1.0, 0.5)
    for o0, o1 in zip(inst.orders, scaled.orders):
        assert o1.fare == pytest.approx(0.5 * o0.fare)


def test_scaling_commutes():
    inst = generate(GenParams(seed=10, n_orders=4, n_stations=2))
    a = scale_prices(scale_prices(inst, 2.0, 0.5, 3.0), 1.5, 2.0, 0.5)
    b = scale_prices(inst, 3.0, 1.0, 1.5)
    for sa, sb in zip(a.stations, b.stations):
        assert sa.power_kw == pytest.approx(sb.power_kw, abs=1e-9)
        for pa, pb in zip(sa.tariff.charge_price, sb.tariff.charge_price):
            assert pa == pytest.approx(pb, abs=1e-9)
    for oa, ob in zip(a.orders, b.orders):
        assert oa.fare == pytest.approx(ob.fare, abs=1e-9)


def test_invalid_params_rejected():
    with pytest.raises(InvalidParams):
        generate(GenParams(seed=0, n_orders=0))
    with pytest.raises(InvalidParams):
        generate(GenParams(seed=0, bbox_fraction=0.0))
    with pytest.raises(InvalidParams):
        generate(GenParams(seed=0, ride_length_bucket="1-2"))
    with pytest.raises(InvalidParams):
        scale_prices(generate(GenParams(seed=0, n_orders=2, n_stations=1)), price_factor=0.0)
