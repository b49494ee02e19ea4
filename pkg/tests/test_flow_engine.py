import math

import numpy as np
import pytest

from hyperflow.errors import ConeExit, InsufficientFrames, MeshDegeneracy
from hyperflow.flow_engine import (
    FlowConfig,
    evolve,
    flow_residual,
    remesh,
    stable_substep,
    step,
)
from hyperflow.hypersurface import (
    INSIDE_CODE,
    classify_points,
    enclosed_volume,
)
from hyperflow import families, shapes
from hyperflow.speeds import catalog, mean_curvature


F_K = mean_curvature(1)
F_H = mean_curvature(2)


def radii(M, center=None):
    c = np.zeros(M.vertices.shape[1]) if center is None else np.asarray(center)
    return np.linalg.norm(M.vertices - c, axis=1)


# ---------------------------------------------------------------------------
# single steps


def test_step_circle_matches_radius_ode():
    M = step(shapes.circle_polygon(1.0, 256), F_K, 0.01)
    assert np.abs(radii(M) - math.exp(0.01)).max() < 1e-4


def test_step_icosphere_matches_radius_ode():
    M = step(shapes.icosphere(1.0, 4), F_H, 0.01)
    assert np.abs(radii(M) - math.exp(0.005)).max() < 1e-3


@pytest.mark.parametrize("n", [1, 2])
def test_step_increases_enclosed_volume(n):
    convex = shapes.ellipse_polygon(1.5, 1.0, 128) if n == 1 else shapes.ellipsoid_mesh(1.3, 1.0, 1.1, 2)
    for F in catalog(n):
        out = step(convex, F, 1e-3)
        assert enclosed_volume(out) > enclosed_volume(convex)


def test_step_rejects_nonconvex_for_positive_cone():
    with pytest.raises(ConeExit):
        step(shapes.peanut_polygon(128), F_K, 1e-3)


def test_step_rejects_nonpositive_dt(unit_circle_256):
    with pytest.raises(ValueError):
        step(unit_circle_256, F_K, 0.0)


# ---------------------------------------------------------------------------
# trajectories


def test_evolve_circle_hits_closed_form():
    traj = evolve(shapes.circle_polygon(1.0, 64), F_K, 0.0, FlowConfig(t_end=1.0, dt=1e-2))
    r = radii(traj.frames[-1][1])
    assert abs(r.mean() - math.e) / math.e < 0.01
    assert r.max() - r.min() < 1e-3 * r.mean()


def test_frames_follow_requested_cadence():
    traj = evolve(shapes.circle_polygon(1.0, 64), F_K, 0.0, FlowConfig(t_end=0.2, dt=1e-3))
    times = traj.times()
    assert times[0] == 0.0
    assert times[-1] == pytest.approx(0.2, abs=1e-12)
    assert np.diff(times) == pytest.approx(0.01, abs=1e-9)


def test_expansiveness_on_sampled_frame_pairs():
    traj = evolve(shapes.ellipse_polygon(2.0, 1.0, 128), F_K, 0.0, FlowConfig(t_end=0.3, dt=2e-3))
    frames = traj.frames
    picks = [(0, len(frames) - 1), (0, len(frames) // 2), (len(frames) // 2, len(frames) - 1)]
    for i, j in picks:
        codes = classify_points(frames[j][1], frames[i][1].vertices)
        assert np.all(codes == INSIDE_CODE)


def test_volume_monotone_along_frames():
    traj = evolve(shapes.ellipse_polygon(2.0, 1.0, 128), F_K, 0.0, FlowConfig(t_end=0.3, dt=2e-3))
    vols = [enclosed_volume(m) for _, m in traj.frames]
    assert all(b > a for a, b in zip(vols, vols[1:]))
    assert not any(e["type"] == "volume_decrease" for e in traj.events)


def test_comparison_principle_nested_inputs():
    cfg = FlowConfig(t_end=0.3, dt=2e-3)
    inner = evolve(shapes.circle_polygon(0.5, 128), F_K, 0.0, cfg)
    outer = evolve(shapes.ellipse_polygon(2.0, 1.0, 128), F_K, 0.0, cfg)
    for (t_i, Mi), (t_o, Mo) in zip(inner.frames, outer.frames):
        assert t_i == pytest.approx(t_o, abs=1e-12)
        assert np.all(classify_points(Mo, Mi.vertices) == INSIDE_CODE)


def test_roundness_improves():
    from hyperflow.hypersurface import inner_outer_radii

    traj = evolve(shapes.ellipse_polygon(2.0, 1.0, 128), F_K, 0.0, FlowConfig(t_end=0.5, dt=2e-3))
    r0 = inner_outer_radii(traj.frames[0][1]).ratio
    r1 = inner_outer_radii(traj.frames[-1][1]).ratio
    assert r1 < r0 - 1e-3


def test_convergence_order_on_coarse_circle():
    # 16-gon keeps both steps inside the explicit stability region, so the
    # error tracks the one-step method's fourth order
    errs = []
    for dt in (0.05, 0.025):
        traj = evolve(shapes.circle_polygon(1.0, 16), F_K, 0.0, FlowConfig(t_end=1.0, dt=dt))
        errs.append(abs(radii(traj.frames[-1][1]).mean() - math.e))
    assert errs[0] / errs[1] >= 3.5


def test_sphere_preservation_spread():
    traj = evolve(shapes.icosphere(1.0, 3), F_H, 0.0, FlowConfig(t_end=0.1, dt=1e-3))
    for _, M in traj.frames:
        r = radii(M)
        assert r.max() - r.min() < 1e-3 * r.mean()


def test_stability_substepping_reported():
    # dt far above the parabolic bound still integrates cleanly
    traj = evolve(shapes.circle_polygon(1.0, 256), F_K, 0.0, FlowConfig(t_end=0.05, dt=1e-3))
    assert any(e["type"] == "stability_substepping" for e in traj.events)
    r = radii(traj.frames[-1][1])
    assert r.max() - r.min() < 1e-9


def test_stable_substep_scales_with_resolution():
    coarse = stable_substep(shapes.circle_polygon(1.0, 16), F_K)
    fine = stable_substep(shapes.circle_polygon(1.0, 64), F_K)
    assert coarse / fine == pytest.approx(16.0, rel=0.05)


def test_cone_margin_warning_event():
    # inject a near-boundary curvature tuple (inside the hard floor, below
    # the warning band) into the cached estimate and run one Euler step
    M = shapes.icosphere(1.0, 1)
    data = M.curvature_data
    lam = data.principal.copy()
    lam[0] = (5e-4 * lam[0, 1], lam[0, 1])
    M.__dict__["curvature_data"] = type(data)(normals=data.normals, principal=lam)
    traj = evolve(M, F_H, 0.0, FlowConfig(t_end=1e-4, dt=1e-4, scheme="euler"))
    assert any(e["type"] == "cone_margin_warning" for e in traj.events)


def test_cone_exit_stops_gracefully_when_configured():
    cfg = FlowConfig(t_end=1.0, dt=1e-3, stop_on_cone_exit=False)
    traj = evolve(shapes.peanut_polygon(128), F_K, 0.0, cfg)
    assert any(e["type"] == "cone_exit" for e in traj.events)
    assert traj.t1 < 1.0


def test_cone_exit_raises_by_default():
    with pytest.raises(ConeExit):
        evolve(shapes.peanut_polygon(128), F_K, 0.0, FlowConfig(t_end=1.0, dt=1e-3))


def test_config_validation():
    with pytest.raises(ValueError):
        FlowConfig(t_end=1.0, cfl=0.0)
    with pytest.raises(ValueError):
        FlowConfig(t_end=1.0, scheme="verlet")
    with pytest.raises(ValueError):
        FlowConfig(t_end=1.0, remesh=True)
    with pytest.raises(ValueError):
        FlowConfig(t_end=1.0, band=(2.0, 1.0))
    with pytest.raises(ValueError):
        evolve(shapes.circle_polygon(1.0, 16), F_K, 2.0, FlowConfig(t_end=1.0))


def test_cfl_policy_runs_without_fixed_dt():
    traj = evolve(shapes.circle_polygon(1.0, 32), F_K, 0.0, FlowConfig(t_end=0.2, dt=None, cfl=0.2))
    r = radii(traj.frames[-1][1])
    assert r.mean() == pytest.approx(math.exp(0.2), rel=1e-3)


# ---------------------------------------------------------------------------
# flow residual


def test_residual_small_on_analytic_sphere_family():
    fam = families.exponential_sphere_family(0.0, 0.5, 0.01, n=1, resolution=128)
    res = flow_residual(fam, F_K)
    assert res.overall_max < 1e-4


def test_residual_large_on_ellipse_family():
    times = -1.0 + 0.01 * np.arange(101)
    fam = families.ellipsoid_family(times, rates=(1.0, 2.0), n=1, resolution=128)
    res = flow_residual(fam, F_K)
    assert res.overall_max > 0.1


def test_residual_of_evolved_trajectory_within_step_budget():
    dt = 1e-3
    traj = evolve(shapes.circle_polygon(1.0, 64), F_K, 0.0, FlowConfig(t_end=0.3, dt=dt))
    res = flow_residual(traj, F_K)
    assert res.overall_max <= 10.0 * dt


def test_residual_needs_three_frames():
    fam = families.exponential_sphere_family(0.0, 0.01, 0.01, n=1, resolution=64)
    assert len(fam.frames) == 2
    with pytest.raises(InsufficientFrames):
        flow_residual(fam, F_K)


# ---------------------------------------------------------------------------
# remeshing


def test_remesh_is_noop_inside_band(unit_circle_256):
    h = float(unit_circle_256.edge_lengths.mean())
    assert remesh(unit_circle_256, (0.5 * h, 2.0 * h)) is unit_circle_256


def test_remesh_splits_coarse_circle():
    c16 = shapes.circle_polygon(1.0, 16)
    h = float(c16.edge_lengths.mean())
    out = remesh(c16, (h / 4.0, h / 1.5), max_volume_change=0.05)
    assert out.num_vertices > 16
    # projected midpoints land exactly on the circumscribed circle, so the
    # estimator's zero error on circles is preserved
    assert np.abs(np.linalg.norm(out.vertices, axis=1) - 1.0).max() < 1e-12
    assert np.abs(out.curvature_data.principal - 1.0).max() < 1e-12
    lens = out.edge_lengths
    assert lens.max() <= h / 1.5 + 1e-12


def test_remesh_volume_guard():
    c16 = shapes.circle_polygon(1.0, 16)
    h = float(c16.edge_lengths.mean())
    with pytest.raises(MeshDegeneracy):
        remesh(c16, (h / 4.0, h / 1.5))  # coarse split moves ~2% of the area


def test_remesh_collapses_short_edges():
    c = shapes.circle_polygon(1.0, 256)
    h = float(c.edge_lengths.mean())
    out = remesh(c, (1.5 * h, 4.0 * h))
    assert out.num_vertices < 256
    assert out.edge_lengths.min() >= 1.5 * h - 1e-12
    assert abs(enclosed_volume(out) - enclosed_volume(c)) < 1e-3 * enclosed_volume(c)


def test_remesh_band_validation(unit_circle_256):
    with pytest.raises(ValueError):
        remesh(unit_circle_256, (1.0, 0.5))
    with pytest.raises(ValueError):
        remesh(unit_circle_256, (1.0, 1.5))  # hi < 2 lo cannot terminate


def test_remesh_splits_mesh_edges():
    M = shapes.icosphere(1.0, 1)
    h = float(M.edge_lengths.max())
    out = remesh(M, (h / 8.0, h / 1.9), max_volume_change=0.05)
    assert out.num_vertices > M.num_vertices
    assert float(out.edge_lengths.max()) <= h / 1.9 + 1e-12


def test_remesh_during_evolution_keeps_band():
    # fine enough that a full split round stays inside the volume guard
    c = shapes.circle_polygon(1.0, 128)
    h0 = float(c.edge_lengths.mean())
    cfg = FlowConfig(t_end=0.6, dt=2e-3, remesh=True, band=(0.25 * h0, 1.3 * h0))
    traj = evolve(c, F_K, 0.0, cfg)
    assert any(e["type"] == "remesh" for e in traj.events)
    final = traj.frames[-1][1]
    assert final.num_vertices > 128
    assert float(final.edge_lengths.max()) <= 1.3 * h0 + 1e-9
    r = radii(final)
    assert r.mean() == pytest.approx(math.exp(0.6), rel=1e-2)


# ---------------------------------------------------------------------------
# trajectory helpers


def test_interpolate_vertices_linear():
    fam = families.exponential_sphere_family(0.0, 0.1, 0.05, n=1, resolution=32)
    mid = fam.interpolate_vertices(0.025)
    want = 0.5 * (fam.frames[0][1].vertices + fam.frames[1][1].vertices)
    assert np.allclose(mid, want)


def test_support_series_monotone_for_expansion():
    fam = families.exponential_sphere_family(-1.0, 0.0, 0.05, n=1, resolution=64)
    s = fam.support_series(np.array([1.0, 0.0]))
    assert np.all(np.diff(s) > 0.0)
