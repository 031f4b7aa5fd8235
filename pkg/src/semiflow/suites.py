"""Build specs from config entries and run the named verification suites."""
from __future__ import annotations

import os
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import quantum_maps as qm
from .config import ConfigError
from .matrix_core import read_matrix
from .operator_space import functional_basis
from .report import VerificationReport
from .resolvent import (
    ClosednessCase,
    closedness_harness,
    default_lambda,
    generator_difference_quotient,
    resolvent_agreement_check,
    resolvent_equation_check,
)
from .semigroup import (
    Conjugation,
    CyclicShift,
    Exponential,
    GridSpec,
    MatrixGroup,
    ShiftExample,
    TruncatedShift,
    check_semigroup_law,
    check_wot_continuity_at_zero,
    estimate_exponential_bound,
    identity_spec,
    omega_invariance_check,
    verify_exponential_bound,
)
from .weak_integration import (
    DominationBound,
    OperatorPath,
    QuadratureConfig,
    commutation_check,
    pettis_consistency_check,
)

__all__ = ["build_spec", "run_suite", "run_suites", "semigroup_path"]

_NAMED = {
    "sigma_x": qm.PAULI_X,
    "sigma_y": qm.PAULI_Y,
    "sigma_z": qm.PAULI_Z,
}


class _Context:
    def __init__(self, base_dir, rng):
        self.base_dir = base_dir
        self.rng = rng

    def matrix(self, ref, d=None):
        if isinstance(ref, str):
            if ref == "identity":
                return np.eye(d, dtype=complex)
            if ref == "random":
                a = self.rng.standard_normal((d, d)) + 1j * self.rng.standard_normal((d, d))
                return a / np.linalg.norm(a, 2)
            if ref in _NAMED:
                return _NAMED[ref]
            return read_matrix(os.path.join(self.base_dir, ref))
        return np.asarray(ref, dtype=complex)


def _num(value):
    return float(value) if isinstance(value, str) else value


def build_spec(spec, ctx):
    variant = spec["variant"]
    if variant == "exponential":
        gen = spec["generator"]
        kind = gen["kind"]
        if kind == "zero":
            return identity_spec(int(gen.get("d", 2)))
        if kind == "dephasing":
            return Exponential.from_lindblad(qm.dephasing_form(), label="dephasing")
        if kind == "lindblad":
            ops = [ctx.matrix(p) for p in gen.get("kraus", [])]
            d = ops[0].shape[0] if ops else None
            h = ctx.matrix(gen["hamiltonian"], d) if "hamiltonian" in gen else np.zeros((d, d))
            return Exponential.from_lindblad(qm.markovian_completion(qm.KrausSet(tuple(ops)), h))
        if kind == "random-lindblad":
            lf = qm.random_lindblad_form(int(gen.get("d", 2)), int(gen.get("kraus_terms", 2)), ctx.rng,
                                         hamiltonian=bool(gen.get("hamiltonian", True)))
            return Exponential.from_lindblad(lf, label="random-lindblad")
        m = ctx.matrix(gen["path"])
        d = int(round(np.sqrt(m.shape[0])))
        return Exponential(qm.Superoperator(d, m), label="matrix")
    if variant == "conjugation":
        con = spec["contraction"]
        kind = con["kind"]
        if kind == "matrix-group":
            return Conjugation(MatrixGroup(ctx.matrix(con["k"])))
        cls = CyclicShift if kind == "cyclic-shift" else TruncatedShift
        return Conjugation(cls(int(con["d"]), float(_num(con["step"]))), label=kind)
    return ShiftExample(GridSpec(int(spec["n"]), float(_num(spec["step"]))))


def semigroup_path(spec, a, lam):
    """``t -> exp(-lambda t) T_t(A)``, held constant on cells for grid specs."""
    step = spec.time_step

    def f(t):
        if step is not None:
            t = np.floor(t / step) * step
        return np.exp(-lam * t) * spec.evaluate(t)(a)

    return OperatorPath(f, spec.d)


def _default_times(spec, count=10, top=1.0):
    if spec.time_step is None:
        return list(np.linspace(top / count, top, count))
    step = spec.time_step
    k = max(1, int(round(top / step)))
    return [step * j for j in range(1, min(k, count) + 1)]


def _lambda(params, bound):
    lam = params.get("lambda")
    return default_lambda(bound) if lam is None else complex(_num(lam))


def _suite_semigroup_law(spec, params, tol, ctx):
    t_grid = [float(_num(t)) for t in params.get("t_grid", _default_times(spec))]
    return check_semigroup_law(spec, t_grid, tol)


def _suite_exp_bound(spec, params, tol, ctx):
    bound = estimate_exponential_bound(spec, float(_num(params.get("delta", 0.1))),
                                       int(params.get("samples", 201)))
    return verify_exponential_bound(spec, bound, float(_num(params.get("horizon", 5.0))),
                                    int(params.get("verify_samples", 101)), tol)


def _suite_wot_zero(spec, params, tol, ctx):
    a = ctx.matrix(params.get("a", "random"), spec.d)
    if "t_seq" in params:
        t_seq = [float(_num(t)) for t in params["t_seq"]]
    elif spec.time_step is None:
        t_seq = [10.0 ** -k for k in range(1, 7)]
    else:
        t_seq = _default_times(spec, count=4)[::-1]
    return check_wot_continuity_at_zero(spec, functional_basis(spec.d), a, t_seq, tol)


def _tail_config(spec, params, bound, lam, **extra):
    dom = DominationBound(bound.m, bound.omega, lam.real)
    return QuadratureConfig(tail=dom, tail_eps=float(_num(params.get("eps", 1e-10))), **extra)


def _suite_pettis(spec, params, tol, ctx):
    a = ctx.matrix(params.get("a", "random"), spec.d)
    bound = estimate_exponential_bound(spec)
    lam = _lambda(params, bound)
    config = _tail_config(spec, params, bound, lam, panels=int(params.get("panels", 64)),
                          nodes_per_panel=int(params.get("nodes_per_panel", 8)))
    path = semigroup_path(spec, a, lam)
    basis = functional_basis(spec.d)
    shared = pettis_consistency_check(path, basis, (0.0, np.inf), config, tol)
    adaptive_cfg = QuadratureConfig(rule="adaptive-simpson", panels=config.panels, tail=config.tail,
                                    tail_eps=config.tail_eps, abs_tol=1e-12)
    independent = pettis_consistency_check(path, basis, (0.0, np.inf), config,
                                           float(_num(params.get("adaptive_tol", 1e-8))), adaptive_cfg)
    report = VerificationReport("pettis")
    report.add("shared-nodes", shared.residuals["pairing-vs-scalar"], tol)
    report.add("independent-quadrature", independent.residuals["pairing-vs-scalar"],
               independent.tolerances["pairing-vs-scalar"])
    report.metadata.update(lam=[lam.real, lam.imag], t_max=shared.metadata["t_max"], m=bound.m, omega=bound.omega)
    return report


def _suite_commutation(spec, params, tol, ctx):
    a = ctx.matrix(params.get("a", "random"), spec.d)
    bound = estimate_exponential_bound(spec)
    lam = _lambda(params, bound)
    sdef = params.get("superop", {"kind": "random"})
    kind = sdef.get("kind", "random")
    if kind == "sandwich":
        s = qm.superop_from_sandwich(ctx.matrix(sdef["left"], spec.d), ctx.matrix(sdef["right"], spec.d))
    elif kind == "random":
        d2 = spec.d * spec.d
        s = qm.Superoperator(spec.d, (ctx.rng.standard_normal((d2, d2)) + 1j * ctx.rng.standard_normal((d2, d2))) / d2)
    else:
        raise ConfigError(f"params.superop.kind: unknown value {kind!r}")
    config = _tail_config(spec, params, bound, lam)
    report = commutation_check(s, semigroup_path(spec, a, lam), (0.0, np.inf), config, tol)
    report.metadata.update(lam=[lam.real, lam.imag], superop=kind)
    return report


def _suite_resolvent_agreement(spec, params, tol, ctx):
    bound = estimate_exponential_bound(spec)
    return resolvent_agreement_check(spec, spec.generator(), _lambda(params, bound), bound,
                                     float(_num(params.get("eps", 1e-9))), None, tol)


def _suite_resolvent_equation(spec, params, tol, ctx):
    bound = estimate_exponential_bound(spec)
    return resolvent_equation_check(spec, spec.generator(), _lambda(params, bound), bound,
                                    float(_num(params.get("eps", 1e-9))), None, tol)


def _suite_difference_quotient(spec, params, tol, ctx):
    a = ctx.matrix(params.get("a", "random"), spec.d)
    if "h_seq" in params:
        h_seq = [float(_num(h)) for h in params["h_seq"]]
    else:
        h_seq = [0.1 * 2.0 ** -k for k in range(6)]
    richardson = bool(params.get("richardson", False))
    target = spec.generator()(a)
    estimate, report = generator_difference_quotient(spec, a, h_seq, functional_basis(spec.d),
                                                     richardson=richardson, reference=target)
    report.add("final-error", float(np.linalg.norm(estimate - target, 2)), tol)
    if "expected_order" in params:
        order_tol = float(_num(params.get("order_tol", 0.1)))
        report.add("order-deviation", abs(report.metadata["order"] - float(_num(params["expected_order"]))),
                   order_tol)
    return report


def _suite_closedness(spec, params, tol, ctx):
    bound = estimate_exponential_bound(spec)
    lam = _lambda(params, bound)
    b_limit = ctx.matrix(params.get("b_limit", "random"), spec.d)
    direction = ctx.matrix(params.get("direction", "random"), spec.d)
    terms = int(params.get("terms", 10))
    rate = float(_num(params.get("rate", 2.0)))
    b_seq = [b_limit + direction * n ** -rate for n in range(1, terms + 1)]
    case = ClosednessCase(lam, b_seq, b_limit, f"b_n = b + n^-{rate:g} dir")
    return closedness_harness(spec, spec.generator(), case, bound, float(_num(params.get("eps", 1e-9))),
                              None, None, tol)


def _suite_cp_unital(spec, params, tol, ctx):
    t_grid = [float(_num(t)) for t in params.get("t_grid", _default_times(spec, count=4))]
    worst_cp, worst_unital = 0.0, 0.0
    min_eigs = []
    for t in t_grid:
        tt = spec.evaluate(t)
        _, lam_min = qm.is_completely_positive(tt, tol)
        _, res = qm.is_unital(tt, tol)
        min_eigs.append(lam_min)
        worst_cp = max(worst_cp, -lam_min)
        worst_unital = max(worst_unital, res)
    report = VerificationReport("cp-unital")
    report.add("choi-negativity", worst_cp, tol)
    report.add("unitality", worst_unital, tol)
    report.metadata.update(t_grid=t_grid, min_choi_eigenvalues=min_eigs)
    return report


def _suite_gks_form(spec, params, tol, ctx):
    lf = getattr(spec, "lindblad_form", None)
    if lf is None:
        raise ConfigError("gks-form needs an exponential spec built from Lindblad data")
    return qm.gks_form_check(lf, tol)


def _suite_omega_invariance(spec, params, tol, ctx):
    if not isinstance(spec, ShiftExample):
        raise ConfigError("omega-invariance needs a shift-example spec")
    s_grid = [float(_num(s)) for s in params.get("s_grid", _default_times(spec, count=16, top=16 * spec.time_step))]
    seed = int(ctx.rng.integers(2 ** 31))
    report = omega_invariance_check(spec.grid, s_grid, tol, int(params.get("n_random", 8)), seed=seed)
    return report


_RUNNERS = {
    "semigroup-law": _suite_semigroup_law,
    "exp-bound": _suite_exp_bound,
    "wot-zero": _suite_wot_zero,
    "pettis": _suite_pettis,
    "commutation": _suite_commutation,
    "resolvent-agreement": _suite_resolvent_agreement,
    "resolvent-equation": _suite_resolvent_equation,
    "difference-quotient": _suite_difference_quotient,
    "closedness": _suite_closedness,
    "cp-unital": _suite_cp_unital,
    "gks-form": _suite_gks_form,
    "omega-invariance": _suite_omega_invariance,
}


def run_suite(entry, index, seed, base_dir="."):
    """Run one suite; exceptions become a failed report instead of propagating."""
    suite_seed = seed ^ index
    ctx = _Context(base_dir, np.random.default_rng(suite_seed))
    start = time.perf_counter()
    try:
        spec = build_spec(entry.spec, ctx)
        report = _RUNNERS[entry.name](spec, entry.params, entry.tol, ctx)
        report.suite = entry.name
    except Exception as exc:  # noqa: BLE001 - reported, never raised
        report = VerificationReport(entry.name, error=f"{type(exc).__name__}: {exc}")
    report.metadata.update(seed=seed, suite_seed=suite_seed, index=index, tol=entry.tol,
                           spec_variant=entry.spec.get("variant"))
    report.wall_time = time.perf_counter() - start
    return report


def run_suites(cfg, parallelism=1, seed=42):
    """One report per suite, in declared order, independent of ``parallelism``."""
    jobs = [(entry, i) for i, entry in enumerate(cfg.suites)]
    if parallelism <= 1:
        return [run_suite(entry, i, seed, cfg.base_dir) for entry, i in jobs]
    with ThreadPoolExecutor(max_workers=parallelism) as pool:
        futures = [pool.submit(run_suite, entry, i, seed, cfg.base_dir) for entry, i in jobs]
        return [f.result() for f in futures]
