import numpy as np
import pytest

from springsticks import (
    EstimatorUndefinedError,
    GridState,
    LatticeSpec,
    MomentState,
    PhysicsParams,
    SdeRun,
    SingularDiffusionError,
    SpringBatch,
    WorkLedger,
    assemble_mass,
    assemble_sde,
    entropy_rates,
    gaussian_entropy,
    integrate_ensemble,
    jarzynski_bootstrap,
    jarzynski_free_energy,
    potential_energy,
    propagate_moments,
    record_switch_work,
    single_dof_sde,
    stable_dt,
)
from springsticks.thermo import save_jarzynski_summary, save_thermo_trace


def oscillator(k=1.0, mass=1.0, gamma=1.0, T=1.0):
    return PhysicsParams(mass=mass, stiffness=k, friction=gamma, temperature=T)


class TestSwitchWork:
    def setup_method(self):
        self.spec = LatticeSpec(d=1, m=1, nodes_per_dim=(3,), origin=(0.0,),
                                spacing=(1.0,))
        self.params = oscillator(k=2.0)
        rng = np.random.default_rng(0)
        self.state = GridState(rng.standard_normal((3, 1)), np.zeros((3, 1)))

    def test_same_batch_zero(self):
        batch = SpringBatch.from_data(self.spec, [[0.5]], [[1.0]])
        led = record_switch_work(WorkLedger(), self.state, batch, batch,
                                 self.params, self.spec)
        assert led.work == pytest.approx(0.0)
        assert led.n_switches == 1

    def test_attachment_jump(self):
        r = self.state.x[1, 0]
        batch = SpringBatch.from_data(self.spec, [[1.0]], [[0.0]])
        led = record_switch_work(WorkLedger(), self.state, None, batch,
                                 self.params, self.spec)
        assert led.work == pytest.approx(self.params.stiffness * r ** 2 / 2)

    def test_random_switch_matches_potential_difference(self):
        rng = np.random.default_rng(1)
        old = SpringBatch.from_data(self.spec, rng.uniform(0, 2, (4, 1)),
                                    rng.standard_normal((4, 1)))
        new = SpringBatch.from_data(self.spec, rng.uniform(0, 2, (6, 1)),
                                    rng.standard_normal((6, 1)))
        led = record_switch_work(WorkLedger(work=1.5, n_switches=3), self.state,
                                 old, new, self.params, self.spec)
        expected = (potential_energy(self.spec, self.state, self.params, new)
                    - potential_energy(self.spec, self.state, self.params, old))
        assert led.work == pytest.approx(1.5 + expected)
        assert led.n_switches == 4


class TestJarzynski:
    def test_zero_work(self):
        assert jarzynski_free_energy(np.zeros(100), oscillator()) == pytest.approx(0.0)

    def test_constant_work(self):
        c = 1.23
        assert jarzynski_free_energy(np.full(50, c), oscillator()) == pytest.approx(-c)

    def test_temperature_zero_is_undefined(self):
        with pytest.raises(EstimatorUndefinedError):
            jarzynski_free_energy(np.ones(10), oscillator(T=0.0))

    def test_jensen_bound(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            works = rng.standard_normal(200) * rng.uniform(0.1, 3.0)
            df = jarzynski_free_energy(works, oscillator())
            assert df >= -works.mean() - 1e-12

    def test_harmonic_quench_analytic(self):
        # equilibrated oscillator, instantaneous k: 1 -> 4 at k_b T = 1
        params = oscillator(k=1.0, gamma=1.0, T=1.0)
        sde = single_dof_sde(params)
        run = SdeRun(dt=5e-3, n_steps=4000, seed=21, record_every=4000)
        _, states = integrate_ensemble(sde, np.zeros((10000, 2)), run)
        x_eq = states[-1][:, 0]
        works = 0.5 * (4.0 - 1.0) * x_eq ** 2
        df = jarzynski_free_energy(works, params)
        expected = 0.5 * np.log(1.0 / 4.0)
        assert abs(df - expected) / abs(expected) < 0.05

    def test_doubling_sample_lands_in_bootstrap_interval(self):
        rng = np.random.default_rng(3)
        works = rng.normal(1.0, 0.8, size=400)
        params = oscillator()
        lo, hi = jarzynski_bootstrap(works[:200], params, n_boot=400, seed=0)
        df2 = jarzynski_free_energy(works, params)
        assert lo - 1e-9 <= df2 <= hi + 1e-9

    def test_summary_file_format(self, tmp_path):
        path = tmp_path / "jarzynski.txt"
        save_jarzynski_summary(path, np.array([0.5, 1.0, 0.2]), oscillator(), seed=5)
        text = path.read_text()
        for field in ("n_traj=3", "mean_W=", "deltaF=", "deltaF_boot_lo=",
                      "deltaF_boot_hi=", "seed=5"):
            assert field in text


class TestMoments:
    def test_static_system_unchanged(self):
        from springsticks import LinearSDE
        sde = LinearSDE(A=np.zeros((2, 2)), b=np.zeros(2), sigma=np.zeros(2), nu=1, m=1)
        mom = MomentState(np.array([1.0, 2.0]), np.diag([0.5, 0.25]))
        out = propagate_moments(sde, mom, 0.1)
        assert np.allclose(out.mean, mom.mean)
        assert np.allclose(out.cov, mom.cov)

    def test_velocity_ou_stationary_variance(self):
        # k = 0: the velocity marginal is an OU process with Var = sigma^2/(2 gamma)
        params = oscillator(k=0.0, gamma=2.0, T=1.3)
        sde = single_dof_sde(params)
        mom = MomentState(np.array([0.0, 3.0]), np.diag([1e-6, 4.0]))
        dt = 1e-3
        for _ in range(int(10.0 / dt)):
            mom = propagate_moments(sde, mom, dt)
        expected = params.noise_sigma ** 2 / (2 * params.friction)
        assert abs(mom.cov[1, 1] - expected) / expected < 0.01
        assert abs(mom.mean[1]) < 1e-6

    def test_matches_monte_carlo_covariance(self):
        params = oscillator(k=1.0, mass=1.0, gamma=1.0, T=1.0)
        sde = single_dof_sde(params)
        z0 = np.array([1.0, 0.0])
        t_final, dt = 2.0, 1e-3
        mom = MomentState(z0.copy(), np.zeros((2, 2)))
        for _ in range(int(t_final / dt)):
            mom = propagate_moments(sde, mom, dt)
        run = SdeRun(dt=dt, n_steps=int(t_final / dt), seed=17,
                     record_every=int(t_final / dt))
        _, states = integrate_ensemble(sde, np.tile(z0, (10000, 1)), run)
        sample_cov = np.cov(states[-1].T)
        rel = np.linalg.norm(sample_cov - mom.cov) / np.linalg.norm(mom.cov)
        assert rel < 0.05
        mom.validate()

    def test_blowup_guard(self):
        from springsticks import LinearSDE
        sde = LinearSDE(A=np.array([[0.0, 1.0], [100.0, 0.0]]), b=np.zeros(2),
                        sigma=np.zeros(2), nu=1, m=1)
        mom = MomentState(np.array([1.0, 0.0]), np.eye(2))
        with pytest.raises(Exception):
            for _ in range(100000):
                mom = propagate_moments(sde, mom, 1.0)


def equilibrium_moments(params):
    """Boltzmann moments of the single-dof oscillator."""
    kbt = params.boltzmann * params.temperature
    return MomentState(np.zeros(2), np.diag([kbt / params.stiffness,
                                             kbt / params.mass]))


class TestEntropyRates:
    def test_equilibrium_production_vanishes(self):
        params = oscillator(k=2.0, mass=1.5, gamma=0.8, T=1.1)
        sde = single_dof_sde(params)
        pi, phi = entropy_rates(sde, equilibrium_moments(params), params)
        assert abs(pi) < 1e-10
        assert abs(phi) < 1e-10

    def test_transient_decays_to_equilibrium(self):
        params = oscillator(k=1.0, mass=1.0, gamma=2.0, T=0.01)
        sde = single_dof_sde(params)
        kbt = params.boltzmann * params.temperature
        mom = MomentState(np.array([2.0, 0.0]),
                          np.diag([0.5, kbt / params.mass]))
        dt = 0.02 * stable_dt(sde)
        pis = []
        for step in range(int(30.0 / dt)):
            pi, phi = entropy_rates(sde, mom, params)
            pis.append(pi)
            mom = propagate_moments(sde, mom, dt)
        pis = np.asarray(pis)
        assert pis.min() > -1e-8
        # production spikes during relaxation and dies off at equilibrium
        assert pis.max() > 1.0
        assert pis[-1] < 1e-3 * pis.max()

    def test_velocity_ou_stationary_cancellation(self):
        # Tr(D Theta^-1) = gamma cancels the drift terms at the OU fixed point
        params = oscillator(k=0.0, gamma=1.3, T=0.7)
        sde = single_dof_sde(params)
        var_v = params.noise_sigma ** 2 / (2 * params.friction)
        mom = MomentState(np.zeros(2), np.diag([50.0, var_v]))
        pi, phi = entropy_rates(sde, mom, params)
        assert abs(pi) < 1e-12
        assert abs(phi) < 1e-12

    def test_free_rig_production_decays(self):
        # k = 0: positions keep spreading but the irreversible current fades
        params = oscillator(k=0.0, gamma=1.0, T=1.0)
        sde = single_dof_sde(params)
        mom = MomentState(np.array([0.0, 1.0]), np.diag([1e-4, 0.3]))
        dt = 1e-3
        pi_early = None
        for step in range(int(30.0 / dt)):
            mom = propagate_moments(sde, mom, dt)
            if step == int(2.0 / dt):
                pi_early, _ = entropy_rates(sde, mom, params)
        pi_late, _ = entropy_rates(sde, mom, params)
        assert 0.0 <= pi_late < pi_early

    def test_ds_dt_consistency(self):
        # dS/dt from the Gaussian entropy matches Pi - Phi within 2 percent
        rng = np.random.default_rng(4)
        spec = LatticeSpec(d=1, m=1, nodes_per_dim=(2,), origin=(0.0,), spacing=(1.0,))
        params = oscillator(k=1.0, mass=1.0, gamma=10.0, T=1e-3)
        batch = SpringBatch.from_data(spec, rng.uniform(0, 1, (10, 1)),
                                      0.1 * rng.standard_normal((10, 1)))
        sde = assemble_sde(spec, params, batch, assemble_mass(spec, params))
        kbt = params.boltzmann * params.temperature
        mass = assemble_mass(spec, params)
        mom = MomentState(np.concatenate([np.full(2, 1.0), np.zeros(2)]),
                          np.block([
                              [0.09 * np.eye(2), np.zeros((2, 2))],
                              [np.zeros((2, 2)), kbt * np.linalg.inv(mass.matrix)],
                          ]))
        dt = 0.02 * stable_dt(sde)
        times, pimphi, entropy = [], [], []
        t = 0.0
        for _ in range(int(20.0 / dt)):
            pi, phi = entropy_rates(sde, mom, params)
            times.append(t)
            pimphi.append(pi - phi)
            entropy.append(gaussian_entropy(mom.cov))
            mom = propagate_moments(sde, mom, dt)
            t += dt
        ds_dt = np.gradient(np.asarray(entropy), np.asarray(times))
        pimphi = np.asarray(pimphi)
        mask = np.abs(ds_dt) > 0.05 * np.abs(ds_dt).max()
        rel = np.abs(ds_dt[mask] - pimphi[mask]) / np.abs(ds_dt[mask])
        assert rel.max() < 0.02

    def test_singular_block_rejected(self):
        params = oscillator(T=0.0)
        sde = single_dof_sde(params)
        mom = MomentState(np.zeros(2), np.eye(2))
        with pytest.raises(SingularDiffusionError):
            entropy_rates(sde, mom, params)
        params2 = oscillator(gamma=0.0)
        with pytest.raises(SingularDiffusionError):
            entropy_rates(single_dof_sde(params2), mom, params2)


class TestHelpers:
    def test_gaussian_entropy_requires_pd(self):
        with pytest.raises(ValueError):
            gaussian_entropy(np.diag([1.0, 0.0]))
        assert gaussian_entropy(np.eye(3)) == pytest.approx(0.0)

    def test_thermo_trace_schema(self, tmp_path):
        path = tmp_path / "thermo.csv"
        save_thermo_trace(path, [0.0, 0.1], [1.0, 0.5], [0.9, 0.4],
                          [0.0, 0.1], [2.0, 1.0], [0.3, 0.2])
        lines = path.read_text().splitlines()
        assert lines[0] == "t,Pi,Phi,S_gauss,U_mean,K_mean"
        assert len(lines) == 3

    def test_ledger_requires_finite(self):
        with pytest.raises(ValueError):
            WorkLedger(work=float("nan"))
