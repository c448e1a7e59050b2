"""Constrained fused-lasso experiment family.

The optimized kernel-lifted loops are checked iterate for iterate against
the generic composite instantiation, the solvers against each other, and
final points against the stationarity certificate.
"""

import json

import numpy as np
import pytest

from pisplit import (SolverConfig, box_project, cmtpd_solve,
                     condat_vu_fused_solve, fhrb_fused_solve, gen_fused_lasso,
                     kkt_residual, load_instance, mtpd_solve, objective,
                     operator_norm_estimate, save_instance)
from pisplit.fused_lasso import FusedLassoInstance
from pisplit.linalg import LinearMap


def _small_instance(seed=0, n=40, k=25):
    return gen_fused_lasso(N=n, K=k, seed=seed)


def test_generation_is_seeded_and_in_range():
    a = gen_fused_lasso(N=30, K=20, seed=7)
    b = gen_fused_lasso(N=30, K=20, seed=7)
    assert np.array_equal(a.M.to_dense(), b.M.to_dense())
    assert np.array_equal(a.z, b.z)
    assert np.array_equal(a.eta0, b.eta0)
    assert np.array_equal(a.eta1, b.eta1)
    c = gen_fused_lasso(N=30, K=20, seed=8)
    assert not np.array_equal(a.z, c.z)
    assert a.n == 30 and a.k == 20
    dense = a.M.to_dense()
    assert dense.shape == (20, 30)
    assert np.all(dense >= 0) and np.all(dense <= a.kappa)
    assert np.all(a.eta0 >= -1.5) and np.all(a.eta0 <= 0)
    assert np.all(a.eta1 >= 0) and np.all(a.eta1 <= 1.5)


def test_default_scale_matrix_norm():
    # kappa U(0,1) matrices concentrate around the rank-one mean profile
    # with norm kappa/2 sqrt(N K)
    inst = gen_fused_lasso(seed=0)
    est = operator_norm_estimate(inst.M, 100)
    want = 0.05 * np.sqrt(1200 * 1000)
    assert abs(est - want) <= 0.1 * want


def test_objective_oracle():
    rng = np.random.default_rng(40)
    inst = _small_instance(seed=2, n=15, k=10)
    dense = inst.M.to_dense()
    for _ in range(10):
        x = rng.standard_normal(15)
        want = (inst.alpha1 / 2.0 * np.sum((dense @ x - inst.z) ** 2)
                + inst.alpha2 * np.abs(np.diff(x)).sum())
        assert objective(inst, x) == pytest.approx(want, rel=1e-12)


def test_optimized_loops_match_generic_instantiation():
    inst = _small_instance(seed=1, n=60, k=30)
    cfg = SolverConfig(max_iters=250, tol=1e-12, record_iterates=True)
    for solve in (mtpd_solve, cmtpd_solve):
        rep_o, tr_o = solve(inst, cfg)
        rep_g, tr_g = solve(inst, cfg, use_generic=True)
        assert tr_o.gamma == tr_g.gamma
        assert tr_o.iterations == tr_g.iterations == 250
        np.testing.assert_allclose(tr_o.residuals, tr_g.residuals,
                                   rtol=0, atol=1e-12)
        for a, b in zip(tr_o.iterates, tr_g.iterates):
            np.testing.assert_allclose(a, b, atol=1e-10)
        np.testing.assert_allclose(tr_o.solution, tr_g.solution, atol=1e-10)
        assert rep_o.objective == pytest.approx(rep_g.objective, rel=1e-10)


def test_default_steps():
    inst = _small_instance(seed=0, n=30, k=20)
    cfg = SolverConfig(max_iters=5, tol=-1.0)
    _, tr = mtpd_solve(inst, cfg)
    assert tr.gamma == pytest.approx(0.999 * 2.0 / 13.0, rel=1e-12)
    _, tr = cmtpd_solve(inst, cfg)
    assert tr.gamma == pytest.approx(0.999 * 0.0732023819, rel=1e-6)
    _, tr = fhrb_fused_solve(inst, cfg)
    nm = float(np.linalg.norm(inst.M.to_dense(), 2))
    assert tr.gamma == pytest.approx(0.999 * 2.0 / (8.0 + 5.0 * nm * nm),
                                     rel=1e-3)


def test_solution_is_box_feasible():
    inst = _small_instance(seed=4)
    for solve in (mtpd_solve, cmtpd_solve):
        _, tr = solve(inst, SolverConfig(max_iters=400, tol=1e-9))
        assert np.array_equal(box_project(tr.solution, inst.eta0, inst.eta1),
                              tr.solution)


def test_solvers_agree_and_certify():
    solvers = (mtpd_solve, cmtpd_solve, fhrb_fused_solve,
               condat_vu_fused_solve)
    for seed in (0, 1):
        inst = _small_instance(seed=seed, n=60, k=30)
        scale = 1.0 + inst.alpha1 * float(np.linalg.norm(
            inst.M.adjoint(inst.z)))
        cfg = SolverConfig(max_iters=60000, tol=1e-8)
        objs = []
        for solve in solvers:
            rep, tr = solve(inst, cfg)
            assert rep.converged, rep.algorithm
            objs.append(rep.objective)
            assert kkt_residual(inst, tr.solution) <= 1e-4 * scale
        assert max(objs) - min(objs) <= 1e-5


def test_report_fields():
    inst = _small_instance(seed=5, n=30, k=20)
    rep, tr = mtpd_solve(inst, SolverConfig(max_iters=20000, tol=1e-8))
    assert rep.algorithm == "mtpd"
    assert rep.iterations == tr.iterations
    assert rep.gamma == tr.gamma
    assert rep.seed == 5
    assert rep.converged and tr.status == "converged"
    assert rep.rel_error == tr.residuals[-1]
    assert rep.objective == pytest.approx(objective(inst, tr.solution))
    assert rep.psnr is None
    assert rep.elapsed_s >= 0.0
    d = rep.as_dict()
    assert d["algorithm"] == "mtpd" and d["seed"] == 5


def test_kkt_residual_unconstrained_least_squares():
    rng = np.random.default_rng(41)
    mat = rng.standard_normal((8, 6))
    z = rng.standard_normal(8)
    inst = FusedLassoInstance(M=LinearMap.from_matrix(mat), z=z,
                              eta0=-1e6 * np.ones(6), eta1=1e6 * np.ones(6),
                              alpha1=5.0, alpha2=0.0)
    xstar = np.linalg.solve(mat.T @ mat, mat.T @ z)
    assert kkt_residual(inst, xstar) <= 1e-8
    # away from the minimizer the certificate grows
    assert kkt_residual(inst, xstar + 0.1) > 1e-2


def test_kkt_residual_discriminates_at_solver_solution():
    inst = _small_instance(seed=6)
    _, tr = mtpd_solve(inst, SolverConfig(max_iters=60000, tol=1e-9))
    at_sol = kkt_residual(inst, tr.solution)
    bumped = box_project(tr.solution + 0.05, inst.eta0, inst.eta1)
    assert kkt_residual(inst, bumped) > 10.0 * max(at_sol, 1e-9)


def test_kkt_residual_validation():
    inst = _small_instance(seed=0, n=10, k=8)
    with pytest.raises(ValueError, match="dimension"):
        kkt_residual(inst, np.zeros(11))
    with pytest.raises(ValueError, match="box"):
        kkt_residual(inst, inst.eta1 + 1.0)


def test_instance_round_trip(tmp_path):
    inst = _small_instance(seed=3, n=12, k=9)
    path = tmp_path / "inst.json"
    save_instance(inst, path)
    back = load_instance(path)
    assert np.array_equal(back.M.to_dense(), inst.M.to_dense())
    assert np.array_equal(back.z, inst.z)
    assert np.array_equal(back.eta0, inst.eta0)
    assert np.array_equal(back.eta1, inst.eta1)
    assert back.alpha1 == inst.alpha1 and back.alpha2 == inst.alpha2
    assert back.kappa == inst.kappa and back.seed == inst.seed
    bogus = tmp_path / "bogus.json"
    bogus.write_text(json.dumps({"format": "other"}))
    with pytest.raises(ValueError, match="instance"):
        load_instance(bogus)
