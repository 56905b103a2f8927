from __future__ import annotations

import numpy as np
import pytest

from alephmap.harness import (
    IrradianceCache,
    RenderParams,
    SceneError,
    dump_scene,
    irradiance_lookup,
    irradiance_sample,
    load_scene,
    parse_scene,
    render,
    save_scene,
    trace_direct,
)
from alephmap.harness import fixtures
from alephmap.harness.cache import harmonic_distance


# ---------------------------------------------------------------------------
# scene files


def test_fixture_primitive_counts():
    s = fixtures.box_scene()
    assert len(s.primitives) == 13
    assert sum(p.kind == "sphere" for p in s.primitives) == 1
    assert sorted(s.cameras) == [0, 1]
    assert len(fixtures.box_scene(closed=True).primitives) == 15


def test_round_trip_through_text(tmp_path):
    s = fixtures.box_scene(frames=3)
    save_scene(s, tmp_path / "box.scene")
    t = load_scene(tmp_path / "box.scene")
    assert dump_scene(t) == dump_scene(s)
    np.testing.assert_array_equal(t.camera(2).position, s.camera(2).position)


@pytest.mark.parametrize(
    "text, msg",
    [
        ("mat m 1 1 1\ncamera 0 0 0 1 0 0 0 0 1 0 40\n", "no primitives"),
        ("mat m 1 1 1\nbogus 1 2 3\n", "line 2: unknown keyword 'bogus'"),
        ("mat m 1 1\n", "line 1"),
        ("mat m 1 1 1\ntri m 0 0 0 1 0 0 0 1 0\ncamera 0 0 0 5 0 0 0 0 1 0 40\n", "emissive"),
    ],
)
def test_parse_errors(text, msg):
    with pytest.raises(SceneError, match=msg):
        parse_scene(text)


def test_missing_frame_transform():
    text = fixtures.box_scene_text(frames=2)
    text = "\n".join(line for line in text.splitlines() if not line.startswith("xform 1"))
    with pytest.raises(SceneError, match="missing frame transform"):
        parse_scene(text)


# ---------------------------------------------------------------------------
# direct light


def _occluder_scene():
    s = fixtures.single_light_scene_text()
    # opaque slab just under the light hides it from the whole floor window
    s += "mat slab 0.5 0.5 0.5\n"
    s += "tri slab -2 0.9 -2  -2 0.9 2  2 0.9 2\ntri slab -2 0.9 -2  2 0.9 2  2 0.9 -2\n"
    return parse_scene(s)


def test_occluded_floor_is_black():
    img = trace_direct(_occluder_scene(), 0, 9, 9, spp=16)
    assert img.data[4, 4].max() == 0.0


def test_emitter_seen_directly_returns_emission():
    s = parse_scene(
        "light lamp 3 2 1\ntri lamp -1 -1 0  1 -1 0  0 1 0\ncamera 0 0 0 5  0 0 0  0 1 0  10\n"
    )
    img = trace_direct(s, 0, 5, 5, spp=4)
    np.testing.assert_array_equal(img.data[2, 2], [3.0, 2.0, 1.0])


def test_direct_light_matches_form_factor():
    p = fixtures.SINGLE_LIGHT
    expect = fixtures.centred_square_radiance(p["side"], p["height"], p["emission"], p["albedo"])
    img = trace_direct(fixtures.single_light_scene(), 0, 9, 9, spp=4096, seed=1)
    got = img.data[4, 4]
    np.testing.assert_allclose(got, expect, rtol=0.02)


def test_corner_form_factor_limit():
    # an infinite plane overhead subtends the whole hemisphere
    assert 4 * fixtures.corner_form_factor(1e6, 1e6, 1.0) == pytest.approx(1.0, abs=1e-5)


def test_trace_direct_is_deterministic():
    s = fixtures.single_light_scene()
    a = trace_direct(s, 0, 7, 7, spp=8, seed=3).data
    b = trace_direct(s, 0, 7, 7, spp=8, seed=3).data
    np.testing.assert_array_equal(a, b)


# ---------------------------------------------------------------------------
# irradiance cache


def test_constant_environment_irradiance():
    s = fixtures.box_scene(closed=True)
    L = 0.7
    for seed in range(3):
        E, R = irradiance_sample(
            s, 0, [0.0, -0.99, 0.0], [0.0, 1.0, 0.0], 64, np.random.default_rng(seed),
            radiance=lambda hit, dirs: np.where(hit.mask[:, None], L, 0.0) * np.ones((1, 3)),
        )
        np.testing.assert_allclose(E, np.pi * L, rtol=1e-12)
        assert 0 < R <= s.bounding_sphere[1]


def test_harmonic_distance():
    assert harmonic_distance([2.0] * 8) == pytest.approx(2.0)
    assert harmonic_distance([2.0] * 4 + [4.0] * 4) == pytest.approx(8.0 / 3.0)
    assert harmonic_distance([1.0, 5.0], [True, False], far=1.0) == pytest.approx(1.0)


def test_irradiance_sample_needs_eight_rays():
    with pytest.raises(ValueError):
        irradiance_sample(fixtures.box_scene(), 0, [0, -1, 0], [0, 1, 0], 4, np.random.default_rng(0))


def _cache_with(*records):
    c = IrradianceCache(capacity=1)
    for P, N, E, R in records:
        c.add(np.asarray(P, float), np.asarray(N, float), np.asarray(E, float), R)
    return c


def test_exact_lookup():
    c = _cache_with(([0, 0, 0], [0, 0, 1], [1, 2, 3], 1.0), ([5, 0, 0], [0, 0, 1], [9, 9, 9], 1.0))
    np.testing.assert_array_equal(irradiance_lookup(c, [0, 0, 0], [0, 0, 1], 0.1), [1, 2, 3])
    assert len(c) == 2  # grew past the initial capacity


def test_weight_examples():
    c = _cache_with(([0, 0, 0], [0, 0, 1], [1, 1, 1], 1.0))
    assert c.weights(np.array([1.0, 0, 0]), np.array([0, 0, 1.0]))[0] == pytest.approx(1.0)
    assert c.weights(np.zeros(3), np.array([1.0, 0, 0]))[0] == pytest.approx(1.0)
    # w = 1 never clears 1/alpha for alpha <= 1
    assert irradiance_lookup(c, [1.0, 0, 0], [0, 0, 1], 1.0) is None
    # aligned normals: reuse radius is alpha * R
    assert irradiance_lookup(c, [0.09, 0, 0], [0, 0, 1], 0.1) is not None
    assert irradiance_lookup(c, [0.11, 0, 0], [0, 0, 1], 0.1) is None


def test_interpolation_is_convex():
    rng = np.random.default_rng(4)
    recs = [(rng.uniform(-0.1, 0.1, 3), [0, 0, 1], rng.uniform(0, 5, 3), 1.0) for _ in range(12)]
    c = _cache_with(*recs)
    E = np.array([r[2] for r in recs])
    for _ in range(50):
        got = irradiance_lookup(c, rng.uniform(-0.1, 0.1, 3), [0, 0, 1], 0.5)
        if got is not None:
            assert (got >= E.min(axis=0) - 1e-12).all() and (got <= E.max(axis=0) + 1e-12).all()


def test_bad_record_radius():
    with pytest.raises(ValueError):
        _cache_with(([0, 0, 0], [0, 0, 1], [1, 1, 1], 0.0))


# ---------------------------------------------------------------------------
# renderer


def _params(**kw):
    base = dict(width=24, height=24, direct_spp=4, irradiance_samples=16, max_spp=64, asp_floor=4)
    base.update(kw)
    return RenderParams(**base)


@pytest.fixture(scope="module")
def box():
    return fixtures.box_scene()


def test_record_count_falls_as_alpha_grows(box):
    counts = [render(box, 0, "uniform", _params(alpha_acc=a))[1].cache_created for a in (0.05, 0.1, 0.2, 0.4)]
    assert all(a >= b for a, b in zip(counts, counts[1:]))
    assert counts[0] > counts[-1]


def test_closed_box_has_no_gain():
    s = fixtures.box_scene(closed=True)
    img, _ = render(s, 0, "uniform", _params())
    assert img.data.max() <= 6.0 and img.data.min() >= 0.0


def test_unit_aleph_alpha_matches_uniform(box):
    p = _params()
    a, sa = render(box, 0, "uniform", p)
    b, sb = render(box, 0, "aleph-alpha", p, aleph=np.ones((24, 24)))
    np.testing.assert_array_equal(a.data, b.data)
    assert sa == sb


def test_unit_aleph_asp_shoots_full_budget(box):
    p = _params(indirect=False)
    _, st = render(box, 0, "asp", p, aleph=np.ones((24, 24)))
    assert st.direct_samples == _surface_pixels(box, 24, 24) * 64


def _surface_pixels(scene, w, h):
    from alephmap.harness.render import _Shading, cast_primary

    return int(_Shading(scene, 0, cast_primary(scene, 0, w, h)).index.size)


def test_high_aleph_creates_fewer_records(box):
    p = _params()
    _, su = render(box, 0, "uniform", p)
    _, sa = render(box, 0, "aleph-alpha", p, aleph=np.full((24, 24), 20.0))
    assert sa.cache_created < su.cache_created


@pytest.mark.parametrize("mode", ["uniform", "aleph-alpha", "avt", "asp"])
def test_stats_invariant(box, mode):
    t = np.full((24, 24), 0.05)
    a = np.full((24, 24), 4.0)
    _, st = render(box, 0, mode, _params(), aleph=a, threshold=t)
    assert st.cache_created + st.cache_interpolated == st.indirect_lookups
    assert min(st.as_dict().values()) >= 0


def test_avt_terminates_within_budget(box):
    p = _params(indirect=False)
    hits = _surface_pixels(box, 24, 24)
    _, loose = render(box, 0, "avt", p, threshold=np.full((24, 24), 1e3))
    _, tight = render(box, 0, "avt", p, threshold=np.full((24, 24), 1e-9))
    assert loose.direct_samples < tight.direct_samples <= hits * p.max_spp


@pytest.mark.parametrize("mode, kw", [("aleph-alpha", {}), ("asp", {}), ("avt", {}), ("asp", {"aleph": np.ones((3, 3))})])
def test_missing_or_misshapen_maps(box, mode, kw):
    with pytest.raises(ValueError):
        render(box, 0, mode, _params(), **kw)
