# tests/test_singularity.py
import math

import numpy as np
import pytest

from app.calculators.atlas import build_atlas
from app.calculators.kinematics import forward_all, forward_kinematics, inverse_kinematics, leg_ik
from app.calculators.singularity import (
    all_working_modes,
    classify_singularity,
    det_a,
    det_b,
    direct_matrix,
    enumerate_working_modes,
    eps_a,
    eps_b,
    matrices,
    solve_rates,
    solve_velocity,
    twist_residual,
    working_mode_of,
)
from app.errors import ModeBoundary, SingularSolve
from app.models import AssemblyMode, FullConfig, GridSpec, JointConfig, PassiveAngles, Point2, SingularityClass, WorkingMode
from helpers import reachable_points


def _example(reference) -> FullConfig:
    return forward_kinematics(reference, JointConfig(theta1=math.pi / 2, theta2=math.pi / 2), AssemblyMode(sign=1))


def _parallel_config(reference) -> FullConfig:
    """θ1 = π/2 и θ2 такое, что |CD| = l2 + l4: C, P, D на одной прямой."""
    # (l0 + l3 cos θ2)² + (l3 sin θ2 − l1)² = (l2 + l4)²  →  90 cos θ2 − 80 sin θ2 = −1
    phi = math.atan2(80.0, 90.0)
    theta2 = math.acos(-1.0 / math.hypot(90.0, 80.0)) - phi
    c = (0.0, 8.0)
    d = (9.0 + 5.0 * math.cos(theta2), 5.0 * math.sin(theta2))
    span = math.hypot(d[0] - c[0], d[1] - c[1])
    ux, uy = (d[0] - c[0]) / span, (d[1] - c[1]) / span
    return FullConfig(
        geometry=reference,
        q=JointConfig(theta1=math.pi / 2, theta2=theta2),
        passive=PassiveAngles(theta3=math.atan2(uy, ux), theta4=math.atan2(-uy, -ux)),
        p=Point2(x=c[0] + 5.0 * ux, y=c[1] + 5.0 * uy),
    )


def _serial_config(reference, folded: bool = False) -> FullConfig:
    """Нога 1 вытянута (θ3 = θ1) или сложена (θ3 = θ1 + π)."""
    t = 0.5
    reach = 3.0 if folded else 13.0
    p = Point2(x=reach * math.cos(t), y=reach * math.sin(t))
    leg2 = leg_ik(reference.b, reference.l3, reference.l4, p, 1)
    return FullConfig(
        geometry=reference,
        q=JointConfig(theta1=t, theta2=leg2.theta_actuated),
        passive=PassiveAngles(theta3=t + math.pi if folded else t, theta4=leg2.theta_passive),
        p=p,
    )


def _regular_configs(reference, rng, n):
    for x, y in reachable_points(reference, rng, n):
        for mode in all_working_modes():
            try:
                cfg = inverse_kinematics(reference, Point2(x=x, y=y), mode)
            except ModeBoundary:
                continue
            b = matrices(cfg).b
            well_posed = (
                abs(det_a(cfg)) > 1e-2 * reference.l2 * reference.l4
                and min(abs(b[0][0]), abs(b[1][1])) > 1e-2 * max(reference.l1 * reference.l2, reference.l3 * reference.l4)
            )
            if well_posed:
                yield cfg


# ---------- Матрицы ----------
def test_thresholds_scale_with_lengths(reference):
    assert eps_a(reference) == pytest.approx(1e-9 * 40)
    assert eps_b(reference) == pytest.approx(1e-9 * 40)


def test_direct_matrix_rows():
    a = direct_matrix(Point2(x=1, y=2), Point2(x=0, y=0), Point2(x=3, y=0))
    assert a == ((1.0, 2.0), (-2.0, 2.0))


def test_example_matrices(reference):
    cfg = _example(reference)
    m = matrices(cfg)
    assert m.a[0] == pytest.approx((cfg.p.x - 0.0, cfg.p.y - 8.0))
    assert m.a[1] == pytest.approx((cfg.p.x - 9.0, cfg.p.y - 5.0))
    assert m.b[0][1] == 0.0 and m.b[1][0] == 0.0
    assert det_a(cfg) == pytest.approx(40.0, abs=0.05)
    assert m.b[0][0] == pytest.approx(-31.066, abs=0.05)
    assert m.b[1][1] == pytest.approx(25.584, abs=0.05)
    assert det_b(cfg) == pytest.approx(m.b[0][0] * m.b[1][1])
    assert working_mode_of(cfg).label == "-+"


def test_stretched_leg_zeroes_b11(reference):
    cfg = _serial_config(reference)
    assert matrices(cfg).b[0][0] == pytest.approx(0.0, abs=1e-12)
    assert det_b(cfg) == pytest.approx(0.0, abs=1e-10)


# ---------- Классификация ----------
@pytest.mark.parametrize("folded", [False, True])
def test_serial_singularity(reference, folded):
    cfg = _serial_config(reference, folded)
    assert classify_singularity(cfg) == SingularityClass.SERIAL
    with pytest.raises(ModeBoundary):
        working_mode_of(cfg)


def test_parallel_singularity(reference):
    cfg = _parallel_config(reference)
    assert cfg.residual() < 1e-12
    assert abs(det_a(cfg)) < 1e-10
    assert classify_singularity(cfg) == SingularityClass.PARALLEL
    # режим при этом определён
    assert len(working_mode_of(cfg).signs) == 2


def test_both_singularities_with_loose_thresholds(reference):
    cfg = _parallel_config(reference)
    assert classify_singularity(cfg, eps_serial=100.0) == SingularityClass.BOTH


def test_regular_configurations(reference, rng):
    seen = 0
    for cfg in _regular_configs(reference, rng, 200):
        assert classify_singularity(cfg) == SingularityClass.REGULAR
        b = matrices(cfg).b
        assert working_mode_of(cfg).signs == (1 if b[0][0] > 0 else -1, 1 if b[1][1] > 0 else -1)
        seen += 1
    assert seen > 300


def test_custom_thresholds_override(reference):
    cfg = _example(reference)
    assert classify_singularity(cfg, eps_parallel=50.0) == SingularityClass.PARALLEL
    with pytest.raises(ModeBoundary):
        working_mode_of(cfg, eps=30.0)


def _cross(o, u, v) -> float:
    return (u[0] - o[0]) * (v[1] - o[1]) - (u[1] - o[1]) * (v[0] - o[0])


def _points_of(cfg: FullConfig):
    """A, B, C, D, P, посчитанные заново по углам и длинам."""
    g, q = cfg.geometry, cfg.q
    c = (g.l1 * math.cos(q.theta1), g.l1 * math.sin(q.theta1))
    d = (g.l0 + g.l3 * math.cos(q.theta2), g.l3 * math.sin(q.theta2))
    return (0.0, 0.0), (g.l0, 0.0), c, d, (cfg.p.x, cfg.p.y)


def _expected_class(cfg: FullConfig, ea: float, eb: float) -> SingularityClass:
    a, b, c, d, p = _points_of(cfg)
    parallel = abs(_cross(c, d, p)) <= ea
    serial = abs(_cross(a, c, p)) <= eb or abs(_cross(b, d, p)) <= eb
    if parallel and serial:
        return SingularityClass.BOTH
    if parallel:
        return SingularityClass.PARALLEL
    return SingularityClass.SERIAL if serial else SingularityClass.REGULAR


@pytest.mark.parametrize("ea, eb", [(None, None), (2.0, 2.0), (8.0, 0.5)])
def test_classification_agrees_with_collinearity(reference, rng, ea, eb):
    seen = set()
    checked = 0
    for t1, t2 in rng.uniform(-math.pi, math.pi, size=(4000, 2)):
        for cfg in forward_all(reference, JointConfig(theta1=t1, theta2=t2)):
            _, _, c, d, p = _points_of(cfg)
            assert det_a(cfg) == pytest.approx(_cross(c, d, p), abs=1e-9)
            expected = _expected_class(cfg, ea or eps_a(reference), eb or eps_b(reference))
            got = classify_singularity(cfg, eps_parallel=ea, eps_serial=eb)
            assert got == expected
            seen.add(got)
            checked += 1
    assert checked > 2000
    if ea is not None:
        assert {SingularityClass.REGULAR, SingularityClass.PARALLEL, SingularityClass.SERIAL} <= seen


def _aligned_leg(reference, rng, leg: int, folded: bool) -> FullConfig:
    """Нога leg вытянута или сложена под случайным углом, вторая нога в случайной позе."""
    g = reference
    if leg == 1:
        anchor, proximal, distal = g.a, g.l1, g.l2
        other = (g.b, g.l3, g.l4)
    else:
        anchor, proximal, distal = g.b, g.l3, g.l4
        other = (g.a, g.l1, g.l2)
    reach = abs(proximal - distal) if folded else proximal + distal
    while True:
        t = rng.uniform(-math.pi, math.pi)
        # сложенная нога: P лежит по другую сторону от A, если звено 2 длиннее
        direction = t + math.pi if folded and distal > proximal else t
        p = Point2(x=anchor.x + reach * math.cos(direction), y=anchor.y + reach * math.sin(direction))
        r_other = math.hypot(p.x - other[0].x, p.y - other[0].y)
        if abs(other[1] - other[2]) + 1e-6 < r_other < other[1] + other[2] - 1e-6:
            break
    sol = leg_ik(other[0], other[1], other[2], p, 1 if rng.uniform() < 0.5 else -1)
    passive = t + math.pi if folded else t
    if leg == 1:
        q = JointConfig(theta1=t, theta2=sol.theta_actuated)
        pa = PassiveAngles(theta3=passive, theta4=sol.theta_passive)
    else:
        q = JointConfig(theta1=sol.theta_actuated, theta2=t)
        pa = PassiveAngles(theta3=sol.theta_passive, theta4=passive)
    return FullConfig(geometry=g, q=q, passive=pa, p=p)


def _aligned_coupler(reference, rng, stretched: bool) -> FullConfig:
    """C, P, D на одной прямой: |CD| = l2 + l4 (P между C и D) или |l2 − l4| (C между P и D, l4 > l2)."""
    g = reference
    span = g.l2 + g.l4 if stretched else abs(g.l2 - g.l4)
    while True:
        t1 = rng.uniform(-math.pi, math.pi)
        c = (g.l1 * math.cos(t1), g.l1 * math.sin(t1))
        vx, vy = c[0] - g.l0, c[1]
        r = math.hypot(vx, vy)
        cos_rel = (r * r + g.l3 * g.l3 - span * span) / (2.0 * g.l3 * r)
        if abs(cos_rel) < 1.0:
            break
    t2 = math.atan2(vy, vx) + (1 if rng.uniform() < 0.5 else -1) * math.acos(cos_rel)
    d = (g.l0 + g.l3 * math.cos(t2), g.l3 * math.sin(t2))
    ux, uy = (d[0] - c[0]) / span, (d[1] - c[1]) / span
    k = g.l2 if stretched else -g.l2
    p = (c[0] + k * ux, c[1] + k * uy)
    return FullConfig(
        geometry=g,
        q=JointConfig(theta1=t1, theta2=t2),
        passive=PassiveAngles(theta3=math.atan2(p[1] - c[1], p[0] - c[0]), theta4=math.atan2(p[1] - d[1], p[0] - d[0])),
        p=Point2(x=p[0], y=p[1]),
    )


@pytest.mark.parametrize("leg", [1, 2])
@pytest.mark.parametrize("folded", [False, True])
def test_constructed_serial_singularities(reference, rng, leg, folded):
    for _ in range(250):
        cfg = _aligned_leg(reference, rng, leg, folded)
        assert classify_singularity(cfg) in (SingularityClass.SERIAL, SingularityClass.BOTH)
        assert _expected_class(cfg, eps_a(reference), eps_b(reference)) == classify_singularity(cfg)
        with pytest.raises(ModeBoundary):
            working_mode_of(cfg)


@pytest.mark.parametrize("stretched", [True, False])
def test_constructed_parallel_singularities(reference, rng, stretched):
    for _ in range(250):
        cfg = _aligned_coupler(reference, rng, stretched)
        assert abs(det_a(cfg)) <= eps_a(reference)
        got = classify_singularity(cfg)
        assert got in (SingularityClass.PARALLEL, SingularityClass.BOTH)
        assert _expected_class(cfg, eps_a(reference), eps_b(reference)) == got
        if got == SingularityClass.PARALLEL:
            assert len(working_mode_of(cfg).signs) == 2


def _path_within(labels, k, start, goal):
    """Кратчайший 4-связный путь по ячейкам с меткой k."""
    ny, nx = labels.shape
    parent = {start: None}
    frontier = [start]
    while frontier and goal not in parent:
        nxt = []
        for r, c in frontier:
            for rr, cc in ((r - 1, c), (r + 1, c), (r, c - 1), (r, c + 1)):
                if 0 <= rr < ny and 0 <= cc < nx and labels[rr, cc] == k and (rr, cc) not in parent:
                    parent[(rr, cc)] = (r, c)
                    nxt.append((rr, cc))
        frontier = nxt
    path = [goal]
    while parent[path[-1]] is not None:
        path.append(parent[path[-1]])
    return path[::-1]


def test_working_mode_is_constant_along_aspect_paths(reference):
    atlas = build_atlas(reference, GridSpec.default_for(reference, 48, 48), min_aspect_fraction=0.0)
    walked = 0
    for label, lg in atlas.layers.items():
        mode = WorkingMode.from_label(label)
        k = int(np.argmax(lg.sizes))
        aspect = lg.aspects[k]
        rows, cols = np.nonzero(lg.labels == k)
        cells = sorted(zip(rows.tolist(), cols.tolist()))
        path = _path_within(lg.labels, k, cells[0], cells[-1])
        assert len(path) >= 2
        for r, c in path:
            cfg = inverse_kinematics(reference, lg.cell(r, c).pose, mode)
            assert classify_singularity(cfg) == SingularityClass.REGULAR
            assert working_mode_of(cfg) == mode
            assert (1 if det_a(cfg) > 0 else -1) == aspect.det_a_sign
            walked += 1
    assert walked > 40


# ---------- Скорости ----------
def test_zero_rates_give_zero_twist(reference):
    v = solve_velocity(_example(reference), [0.0, 0.0])
    assert np.allclose(v, 0.0)


def test_parallel_config_refuses_velocity(reference):
    with pytest.raises(SingularSolve) as exc:
        solve_velocity(_parallel_config(reference), [1.0, 0.0])
    assert exc.value.matrix == "A"


def test_serial_config_refuses_rates(reference):
    with pytest.raises(SingularSolve) as exc:
        solve_rates(_serial_config(reference), [1.0, 0.0])
    assert exc.value.matrix == "B"


def test_velocity_matches_finite_differences(reference, rng):
    h = 1e-6
    checked = 0
    for cfg in _regular_configs(reference, rng, 50):
        q_dot = rng.uniform(-1.0, 1.0, 2)
        v = solve_velocity(cfg, q_dot)
        am = AssemblyMode(sign=1 if det_a(cfg) > 0 else -1)
        t1, t2 = cfg.q.theta1, cfg.q.theta2
        fwd = forward_kinematics(reference, JointConfig(theta1=t1 + h * q_dot[0], theta2=t2 + h * q_dot[1]), am).p
        bwd = forward_kinematics(reference, JointConfig(theta1=t1 - h * q_dot[0], theta2=t2 - h * q_dot[1]), am).p
        fd = np.array([fwd.x - bwd.x, fwd.y - bwd.y]) / (2 * h)
        assert np.linalg.norm(fd - v) <= 1e-5 * np.linalg.norm(v) + 1e-7
        checked += 1
    assert checked > 20


def test_rates_invert_velocity(reference, rng):
    for cfg in _regular_configs(reference, rng, 100):
        q_dot = rng.uniform(-2.0, 2.0, 2)
        p_dot = solve_velocity(cfg, q_dot)
        assert np.allclose(solve_rates(cfg, p_dot), q_dot, atol=1e-9)
        assert twist_residual(cfg, p_dot, q_dot) < 1e-9


def test_twist_residual_of_inconsistent_pair(reference):
    cfg = _example(reference)
    p_dot = solve_velocity(cfg, [1.0, 0.0])
    assert twist_residual(cfg, p_dot, [0.0, 1.0]) > 1.0


# ---------- Комбинаторика режимов ----------
@pytest.mark.parametrize(
    "postures, expected",
    [([2, 2, 2], 8), ([2] * 6, 64), ([2, 2], 4), ([1], 1), ([3, 2], 6)],
)
def test_mode_counts(postures, expected):
    count, vectors = enumerate_working_modes(postures)
    assert count == expected
    assert len(vectors) == expected
    assert len(set(vectors)) == expected


def test_modes_are_listed_lexicographically():
    _, vectors = enumerate_working_modes([2, 2])
    assert vectors == [(0, 0), (0, 1), (1, 0), (1, 1)]
    _, vectors = enumerate_working_modes([3, 2])
    assert vectors == sorted(vectors)


@pytest.mark.parametrize("postures", [[], [2, 0]])
def test_bad_posture_counts(postures):
    with pytest.raises(ValueError):
        enumerate_working_modes(postures)


def test_five_bar_modes():
    assert [m.label for m in all_working_modes()] == ["++", "+-", "-+", "--"]
