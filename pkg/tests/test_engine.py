import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings

from conftest import random_rotations, random_swarm, seeds
from se3swarm.commnet import cycling_edges_schedule, laplacian, schedule_to_dict
from se3swarm.config import ConfigError, Tolerances, config_from_dict, load_config
from se3swarm.consensus import heun_step
from se3swarm.controllers import VirtualParticle
from se3swarm.engine import (
    IntegrationError,
    Kind,
    LawEvaluator,
    SimState,
    Trajectory,
    apply_group_action,
    classify_equilibrium,
    compute_metrics,
    initial_state,
    lyapunov_Q,
    lyapunov_S,
    lyapunov_U,
    lyapunov_Vx,
    read_metrics_csv,
    read_trajectory_csv,
    simulate,
    simulate_batch,
    step,
    write_metrics_csv,
    write_trajectory_csv,
)
from se3swarm.liegroup import Pose, Twist, exp_se3, screw_of_twist
from se3swarm.swarm import spatial_twists

E3v = np.array([0.0, 0.0, 1.0])


def cfg_of(**kw):
    kw.setdefault("n_agents", 5)
    kw.setdefault("horizon", 2.0)
    return config_from_dict(kw)


def limited_cfg(law="screw_limited", n=5, **kw):
    return cfg_of(n_agents=n, law=law, graph=schedule_to_dict(cycling_edges_schedule(n, 0.3)), **kw)


def exact_screw_trajectory(xi: Twist, n=6, k=30, dt=0.1, seed=0):
    """Agents carried rigidly by one spatial twist: every spatial twist equals xi."""
    rng = np.random.default_rng(seed)
    # u = R^T w gives spatial angular velocity w; the linear part then needs x . w = v . w
    # and r solving r x w = v - x (free along the axis)
    w, v = xi.angular, xi.linear
    nw = np.linalg.norm(w)
    Rs, rs = [], []
    for _ in range(n):
        if nw == 0:
            x = v / np.linalg.norm(v)
            y = np.cross(x, rng.normal(size=3))
            y /= np.linalg.norm(y)
            Rs.append(np.column_stack([x, y, np.cross(x, y)]))
            rs.append(rng.normal(size=3))
            continue
        w_hat = w / nw
        axial = (v @ w) / nw
        t = np.cross(w_hat, rng.normal(size=3))
        t /= np.linalg.norm(t)
        x = axial * w_hat + math.sqrt(1 - axial**2) * t
        y = np.cross(x, rng.normal(size=3))
        y /= np.linalg.norm(y)
        Rs.append(np.column_stack([x, y, np.cross(x, y)]))
        rs.append(np.cross(w, v - x) / (w @ w) + rng.normal() * w)
    poses = [Pose(R, r) for R, r in zip(Rs, rs)]
    times, rot, pos, ctrl = [], [], [], []
    for i in range(k):
        t = i * dt
        gs = [exp_se3(xi, t) @ g for g in poses]
        times.append(t)
        rot.append([g.rotation for g in gs])
        pos.append([g.position for g in gs])
        ctrl.append([g.rotation.T @ w for g in gs])
    return Trajectory(np.array(times), np.array(rot), np.array(pos), np.array(ctrl))


class TestStep:
    def test_constant_control_is_exact_screw(self, rng):
        R, r = random_swarm(rng, 1)
        u = np.array([[0.3, -0.2, 0.7]])
        state = SimState(0.0, R, r)
        xi_a = spatial_twists(R, r, u)[0]
        screw = screw_of_twist(Twist.from_vector(xi_a))
        g0 = Pose(R[0], r[0])
        h = 0.01
        for i in range(1, 10_001):
            state = step(state, u, {}, h)
            if i % 1000 == 0:
                exact = exp_se3(Twist.from_vector(xi_a), i * h) @ g0
                assert np.allclose(state.r[0], exact.position, atol=1e-10)
                assert np.allclose(state.R[0], exact.rotation, atol=1e-10)
        assert screw.magnitude > 0

    def test_zero_control_is_straight_line(self, rng):
        R, r = random_swarm(rng, 3)
        state = SimState(0.0, R, r)
        for _ in range(100):
            state = step(state, np.zeros((3, 3)), {}, 0.05)
        assert np.allclose(state.r, r + 5.0 * R[:, :, 0], atol=1e-12)
        assert np.array_equal(state.R, R) or np.allclose(state.R, R, atol=1e-15)

    def test_non_finite_control_aborts(self, rng):
        R, r = random_swarm(rng, 2)
        with pytest.raises(IntegrationError, match="non-finite"):
            step(SimState(0.0, R, r), np.array([[0.0, np.nan, 0.0], [0.0, 0.0, 0.0]]), {}, 0.01)

    @pytest.mark.parametrize("scheme", ["euler", "heun"])
    def test_spatial_consensus_follows_explicit_scheme(self, rng, scheme):
        cfg = limited_cfg(consensus_scheme=scheme)
        law = LawEvaluator(cfg)
        st = initial_state(cfg, 7)
        L = laplacian(cfg.graph.adjacency_at(0.0))
        u, d = law.evaluate(st)
        rederive = lambda cons: law(st.R, st.r, cons, st.t, st.virtuals)  # noqa: E731
        nxt = step(st, u, d, 0.01, scheme, rederive)
        for k in ("omega", "b", "c"):
            p = st.spatial_consensus(k)
            expected = p - 0.01 * L @ p if scheme == "euler" else heun_step(p, L, 0.01)
            assert np.allclose(nxt.spatial_consensus(k), expected, atol=1e-12)

    def test_first_order_convergence_of_consensus(self):
        # Richardson-style check against an h/100 reference: halving h halves the error
        base = dict(n_agents=4, law="screw_dynamic", horizon=0.5, seed=3, output={"trajectory_stride": 1})

        def final_omega(h):
            cfg = config_from_dict(dict(base, h=h))
            law = LawEvaluator(cfg)
            st = initial_state(cfg)
            for _ in range(cfg.n_steps):
                u, d = law.evaluate(st)
                st = step(st, u, d, h)
            return st.spatial_consensus("omega")

        ref = final_omega(0.0002)
        e1 = np.abs(final_omega(0.02) - ref).max()
        e2 = np.abs(final_omega(0.01) - ref).max()
        assert e1 / e2 == pytest.approx(2.0, rel=0.1)

    def test_reorthonormalization_keeps_frames(self):
        cfg = cfg_of(n_agents=6, law={"name": "screw_pitch", "omega0": [0, 0, 1], "alpha": 0.3}, horizon=200.0)
        mon = {"drift": lambda s, u: np.abs(np.linalg.norm(s.R[..., 0], axis=-1) - 1).max(axis=-1)}
        _, _, _, tr = simulate_batch(cfg, [0, 1], mon, 500)
        assert tr["drift"].max() <= 1e-12


class TestClassifier:
    def test_recovers_exact_helix(self):
        xi = Twist(np.array([0.2, -0.1, 0.4]), np.array([0.0, 0.6, 0.8]))
        traj = exact_screw_trajectory(xi)
        v = classify_equilibrium(traj, (0.0, 3.0))
        s = screw_of_twist(xi)
        assert v.kind is Kind.HELICAL
        assert v.screw.pitch == pytest.approx(s.pitch, abs=1e-9)
        assert np.allclose(v.screw.axis_point, s.axis_point, atol=1e-9)
        assert np.allclose(v.screw.axis_direction, s.axis_direction, atol=1e-9)
        assert v.screw.magnitude == pytest.approx(s.magnitude, abs=1e-9)

    def test_circular(self):
        traj = exact_screw_trajectory(Twist(np.array([0.5, 0.0, 0.0]), E3v))
        assert classify_equilibrium(traj, (0.0, 3.0)).kind is Kind.CIRCULAR

    def test_parallel(self):
        traj = exact_screw_trajectory(Twist(np.array([0.0, 1.0, 0.0]), np.zeros(3)))
        v = classify_equilibrium(traj, (0.0, 3.0))
        assert v.kind is Kind.PARALLEL and v.screw.is_translation

    def test_none_when_dispersed(self, rng):
        traj = exact_screw_trajectory(Twist(np.array([0.5, 0.0, 0.0]), E3v))
        traj.controls = traj.controls + rng.normal(size=traj.controls.shape) * 0.1
        v = classify_equilibrium(traj, (0.0, 3.0))
        assert v.kind is Kind.NONE and v.screw is None

    def test_window_too_short(self):
        traj = exact_screw_trajectory(Twist(np.array([0.5, 0.0, 0.0]), E3v))
        with pytest.raises(ValueError, match="at least 10"):
            classify_equilibrium(traj, (0.0, 0.5))

    def test_tolerances_respected(self):
        traj = exact_screw_trajectory(Twist(np.array([0.5, 0.0, 0.02]), E3v))
        assert classify_equilibrium(traj, (0.0, 3.0)).kind is Kind.HELICAL
        assert classify_equilibrium(traj, (0.0, 3.0), Tolerances(pitch=0.05)).kind is Kind.CIRCULAR

    def test_agent_subset(self, rng):
        traj = exact_screw_trajectory(Twist(np.array([0.5, 0.0, 0.0]), E3v))
        traj.controls[:, 0] += 1.0
        assert classify_equilibrium(traj, (0.0, 3.0)).kind is Kind.NONE
        assert classify_equilibrium(traj, (0.0, 3.0), agents=[2, 3, 4]).kind is Kind.CIRCULAR


class TestMetrics:
    def test_absent_metrics_for_law(self):
        res = simulate(cfg_of(law="parallel"))
        m = res.metrics[0]
        assert m.S is None and m.Q is None and m.U is None and m.disagreement_b is None
        res = simulate(cfg_of(law={"name": "screw_pitch", "omega0": [0, 0, 1], "alpha": 0.3}))
        m = res.metrics[0]
        assert m.S is not None and m.Q is not None and m.U is None

    def test_nonnegative(self):
        res = simulate(limited_cfg())
        for m in res.metrics:
            for name in ("V", "V_x", "S", "U", "twist_dispersion", "disagreement_b", "disagreement_c"):
                val = getattr(m, name)
                assert val is None or val >= 0

    def test_potentials_against_direct_sums(self, rng):
        R, r = random_swarm(rng, 5)
        x = R[:, :, 0]
        w0 = np.array([0.2, 0.4, -1.0])
        va = x + np.cross(r, w0)
        assert lyapunov_S(R, r, w0) == pytest.approx(0.5 * sum(np.sum((v - va.mean(0)) ** 2) for v in va))
        assert lyapunov_Vx(R) == pytest.approx(2.5 * (1 - np.sum(x.mean(0) ** 2)))
        w_hat = w0 / np.linalg.norm(w0)
        assert lyapunov_Q(R, w0, 0.3) == pytest.approx(2.5 * (x.mean(0) @ w_hat - 0.3) ** 2)
        wa = rng.normal(size=(5, 3))
        assert lyapunov_U(wa) == pytest.approx(2.5 * np.sum((wa - wa.mean(0)) ** 2))

    def test_pitch_absent_for_zero_control(self, rng):
        cfg = cfg_of(law="parallel")
        st = initial_state(cfg)
        m = compute_metrics(st, np.zeros((5, 3)), LawEvaluator(cfg))
        assert m.pitches == [None] * 5


LYAPUNOV_CASES = {
    "V_x parallel": (
        dict(n_agents=10, law="parallel"),
        lambda s: lyapunov_Vx(s.R),
    ),
    "S screw_fixed": (
        dict(n_agents=8, law={"name": "screw_fixed", "omega0": [0, 0, 1]}),
        lambda s: lyapunov_S(s.R, s.r, E3v),
    ),
    "Q+S screw_pitch": (
        dict(n_agents=8, law={"name": "screw_pitch", "omega0": [0, 0, 1], "alpha": 0.3}),
        lambda s: lyapunov_S(s.R, s.r, E3v) + lyapunov_Q(s.R, E3v, 0.3),
    ),
    "U screw_dynamic": (
        dict(n_agents=10, law="screw_dynamic"),
        lambda s: lyapunov_U(s.spatial_consensus("omega")),
    ),
}


@pytest.mark.parametrize("name", list(LYAPUNOV_CASES))
def test_lyapunov_monotone(name):
    d, f = LYAPUNOV_CASES[name]
    worst = {}
    for h in (0.01, 0.005):
        cfg = config_from_dict(dict(d, h=h, horizon=10.0))
        _, _, _, tr = simulate_batch(cfg, range(10), {"f": lambda s, u: f(s)})
        inc = np.diff(tr["f"], axis=0).max()
        # the discrete potentials decrease up to rounding, well inside the 10 h^2 budget
        assert inc <= 10 * h * h
        worst[h] = inc
    floor = 1e-12 * (1 + tr["f"][0].max())
    assert worst[0.005] <= max(worst[0.01] / 4, floor)


class TestSimulate:
    def test_deterministic(self):
        a = simulate(limited_cfg())
        b = simulate(limited_cfg())
        assert np.array_equal(a.trajectory.positions, b.trajectory.positions)
        assert np.array_equal(a.trajectory.controls, b.trajectory.controls)

    def test_seed_changes_run(self):
        a = simulate(cfg_of(law="parallel", seed=1))
        b = simulate(cfg_of(law="parallel", seed=2))
        assert not np.array_equal(a.trajectory.positions, b.trajectory.positions)

    def test_trajectory_csv_round_trip(self, tmp_path):
        res = simulate(limited_cfg(horizon=3.0, output={"trajectory_stride": 5}))
        write_trajectory_csv(res.trajectory, tmp_path / "t.csv")
        back = read_trajectory_csv(tmp_path / "t.csv")
        tr = res.trajectory
        assert np.array_equal(back.times, tr.times)
        assert np.array_equal(back.rotations, tr.rotations)
        assert np.array_equal(back.positions, tr.positions)
        assert np.array_equal(back.controls, tr.controls)
        for k in ("omega", "b", "c"):
            assert np.array_equal(back.consensus[k], tr.consensus[k])
        w = res.verdict.window
        v2 = classify_equilibrium(back, w, res.config.tolerances)
        assert v2.kind == res.verdict.kind and v2.residual == res.verdict.residual

    def test_header_columns(self, tmp_path):
        res = simulate(cfg_of(law="screw_dynamic", horizon=0.2, output={"trajectory_stride": 1}))
        write_trajectory_csv(res.trajectory, tmp_path / "t.csv")
        header = (tmp_path / "t.csv").read_text().splitlines()[0]
        assert header == "t,agent_id,rx,ry,rz,xx,xy,xz,yx,yy,yz,zx,zy,zz,u1,u2,u3,w1,w2,w3"

    def test_metrics_csv_absent_cells(self, tmp_path):
        res = simulate(cfg_of(law="parallel", horizon=0.5, output={"trajectory_stride": 1}))
        write_metrics_csv(res.metrics, tmp_path / "m.csv")
        rows = read_metrics_csv(tmp_path / "m.csv")
        assert rows[0]["S"] is None and rows[0]["V_x"] == pytest.approx(res.metrics[0].V_x)
        assert len(rows) == len(res.metrics)

    @pytest.mark.parametrize(
        "text",
        [
            "t,agent_id\n0,1\n",
            "t,agent_id,rx,ry,rz,xx,xy,xz,yx,yy,yz,zx,zy,zz,u1,u2,u3\n0,1,a,0,0,1,0,0,0,1,0,0,0,1,0,0,0\n",
            "t,agent_id,rx,ry,rz,xx,xy,xz,yx,yy,yz,zx,zy,zz,u1,u2,u3,q1\n",
        ],
    )
    def test_malformed_trajectory(self, tmp_path, text):
        from se3swarm.engine import TrajectoryFormatError

        (tmp_path / "bad.csv").write_text(text)
        with pytest.raises(TrajectoryFormatError):
            read_trajectory_csv(tmp_path / "bad.csv")

    def test_screw_pitch_helical_end_to_end(self):
        res = simulate(load_config("screw_pitch"))
        assert res.verdict.kind is Kind.HELICAL
        assert res.verdict.screw.pitch == pytest.approx(0.3, abs=1e-3)

    def test_alpha_zero_is_circular(self):
        res = simulate(load_config("circular"))
        assert res.verdict.kind is Kind.CIRCULAR

    def test_cascade_consensus_ignores_particles(self, rng):
        # same spatial omega initials, different poses: identical omega^a disagreement series
        cfg = cfg_of(n_agents=4, law="screw_dynamic", horizon=1.0, output={"metrics_stride": 1})
        wa = rng.normal(size=(4, 3))
        runs = []
        for seed in (1, 2):
            R, r = random_swarm(np.random.default_rng(seed), 4)
            explicit = {"rotations": R.tolist(), "positions": r.tolist(), "omega": wa.tolist()}
            runs.append(simulate(replace(cfg, initial=replace(cfg.initial, explicit=explicit))))
        d1 = np.array([m.disagreement_omega for m in runs[0].metrics])
        d2 = np.array([m.disagreement_omega for m in runs[1].metrics])
        assert np.allclose(d1, d2, rtol=1e-9, atol=1e-25)


class TestGroupAction:
    def _controls(self, cfg):
        return simulate(cfg).trajectory.controls

    def test_identity_action(self):
        cfg = limited_cfg(horizon=1.0)
        assert np.allclose(self._controls(apply_group_action(cfg, np.eye(3), np.zeros(3))), self._controls(cfg), atol=1e-12)

    def test_translation_screw_fixed(self):
        cfg = cfg_of(n_agents=6, law={"name": "screw_fixed", "omega0": [0, 0, 1]}, horizon=5.0)
        moved = apply_group_action(cfg, np.eye(3), np.array([3.0, -2.0, 7.0]))
        assert np.abs(self._controls(moved) - self._controls(cfg)).max() <= 1e-9

    def test_full_action_screw_dynamic(self, rng):
        cfg = cfg_of(n_agents=6, law="screw_dynamic", horizon=5.0)
        moved = apply_group_action(cfg, random_rotations(rng), rng.normal(size=3) * 3)
        assert np.abs(self._controls(moved) - self._controls(cfg)).max() <= 1e-9

    def test_rotation_breaks_screw_fixed(self, rng):
        cfg = cfg_of(n_agents=6, law={"name": "screw_fixed", "omega0": [0, 0, 1]}, horizon=5.0)
        moved = apply_group_action(cfg, random_rotations(rng), np.zeros(3))
        assert np.abs(self._controls(moved) - self._controls(cfg)).max() > 1e-3


class TestConfigErrors:
    @pytest.mark.parametrize(
        "d, msg",
        [
            (dict(n_agents=3, law="flocking"), "unknown law"),
            (dict(n_agents=3, law="screw_fixed"), "omega0"),
            (dict(n_agents=3, law={"name": "screw_pitch", "omega0": [0, 0, 0], "alpha": 0.1}), "nonzero"),
            (dict(n_agents=3, law={"name": "screw_pitch", "omega0": [0, 0, 1], "alpha": 1.2}), "alpha"),
            (dict(n_agents=3, law="screw_limited"), "graph"),
            (dict(n_agents=3, law="parallel", h=0.0), "h must be positive"),
            (dict(n_agents=3, law="parallel", h=0.1, horizon=0.01), "horizon"),
            (dict(n_agents=3, law="parallel", colour="red"), "unknown config keys"),
            (dict(n_agents=3, law="parallel", consensus_scheme="rk4"), "consensus_scheme"),
            (dict(n_agents=3, law={"name": "screw_reference", "virtual": {"pitch": 2.0, "omega0": [1, 1, 1]}}), "unreachable"),
            (dict(law="parallel"), "n_agents"),
            (dict(n_agents=3, law="parallel", horizon=0.5), "fewer than 10"),
        ],
    )
    def test_rejected_before_integration(self, d, msg):
        with pytest.raises(ConfigError, match=msg):
            config_from_dict(d)

    def test_graph_size_mismatch(self):
        with pytest.raises(ConfigError, match="nodes"):
            config_from_dict(dict(n_agents=4, law="parallel_limited", graph=schedule_to_dict(cycling_edges_schedule(3, 1.0))))

    def test_group_must_cover_agents(self):
        vp = {"pitch": 0.1, "omega0": [0, 0, 1]}
        with pytest.raises(ConfigError, match="not assigned"):
            config_from_dict(dict(n_agents=3, law={"name": "screw_multigroup", "groups": [{"members": [1, 2], "virtual": vp}]}))

    def test_overrides(self):
        cfg = load_config("screw_pitch", {"seed": 9, "law.alpha": 0.7, "horizon": 1.0})
        assert cfg.seed == 9 and cfg.law.alpha == 0.7 and cfg.horizon == 1.0

    def test_virtual_particle_from_config(self):
        cfg = load_config("helix_reference")
        vp = cfg.law.virtual_particle()
        assert isinstance(vp, VirtualParticle) and vp.screw.pitch == pytest.approx(0.5)


@given(seeds)
@settings(max_examples=10, deadline=None)
def test_initial_state_is_valid(seed):
    cfg = limited_cfg(n=7)
    st = initial_state(cfg, seed)
    assert np.abs(np.swapaxes(st.R, -1, -2) @ st.R - np.eye(3)).max() < 1e-12
    assert np.all(np.abs(st.r) <= cfg.initial.position_half_width)
    for k in ("omega", "b"):
        assert np.all(np.abs(st.spatial_consensus(k)) <= cfg.initial.consensus_half_width + 1e-12)
