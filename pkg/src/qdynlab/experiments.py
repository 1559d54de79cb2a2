"""Named experiments behind the command-line runner.

Each experiment takes a dict of validated settings and returns an
:class:`ExperimentResult`: ordered tables, named pass/fail checks and a few
scalar summary values.  Nothing here touches the file system.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import lindblad as lb
from .lieb_robinson import (
    DecayFunction,
    LatticeGeometry,
    LocalMap,
    LRConstants,
    lr_bound,
    lr_bound_reduced,
    measure_signal,
)
from .micromaser import (
    FullSystemOracle,
    MicromaserParams,
    cavity_channel,
    characteristic_function,
    energy_cumulative_perfect_reversed_order,
    energy_step_perfect_reversed_order,
    energy_variation_leaky,
    energy_variation_perfect,
    energy_variation_perfect_cumulative,
    entropy_production,
    gibbs_state,
    iterate_states,
    leaky_energy_limit,
    leaky_limit_bounds,
    leaky_pumping_part,
    limiting_characteristic,
    photon_number_closed,
    photon_number_limit,
    quasifree_defect,
    relative_entropy,
)
from .models import SX, SY, SZ, dissipative_xx_chain
from .operators import embed, fock_state, number_op, operator_norm, weyl_op
from .thermo_limit import VolumeSequence, convergence_series, tail_bound


@dataclass
class Table:
    columns: list[str]
    rows: list[list] = field(default_factory=list)

    def add(self, *row):
        if len(row) != len(self.columns):
            raise ValueError("row length does not match the columns")
        self.rows.append(list(row))


@dataclass
class Check:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class ExperimentResult:
    tables: dict[str, Table] = field(default_factory=dict)
    checks: list[Check] = field(default_factory=list)
    values: dict[str, object] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def check(self, name: str, passed: bool, detail: str = ""):
        self.checks.append(Check(name, bool(passed), detail))


# ---------------------------------------------------------------- lattice experiments


def lr_scan(cfg: dict) -> ExperimentResult:
    """Measured signal ||K gamma_{t,0}(B)|| against the Lieb-Robinson bound along a chain."""
    n = cfg["sites"]
    spec = dissipative_xx_chain(
        range(n), cfg["coupling"], cfg["dephasing"], cfg["damping"], cfg["modulation"]
    )
    geom = LatticeGeometry.chain(n)
    decay = DecayFunction(1, cfg["eps_f"], cfg["mu"])
    times = np.linspace(0.0, cfg["t_max"], cfg["points"])
    consts = LRConstants.compute(spec, cfg["t_max"], geom, decay)
    b_site, k_site = 0, n - 1
    b = embed(SZ, (b_site,), spec.lattice)
    kinds = ["commutator", "lindblad"] if cfg["kind"] == "both" else [cfg["kind"]]
    maps = {
        "commutator": LocalMap((k_site,), SX),
        "lindblad": LocalMap((k_site,), SX, (math.sqrt(0.1) * SZ,), kind="lindblad"),
    }
    control = lb.StepControl(cfg["tol"])
    table = Table(["t", "kind", "measured", "bound", "reduced_bound"])
    res = ExperimentResult({"signal": table})
    for kind in kinds:
        kmap = maps[kind]
        measured = measure_signal(spec, kmap, b, times, 0.0, control)
        ok = True
        for t, m in zip(times, measured):
            args = (kmap.cb_upper, operator_norm(SZ), (k_site,), (b_site,), t, consts)
            bound = lr_bound(*args)
            table.add(t, kind, m, bound, lr_bound_reduced(*args))
            ok &= m <= bound
        res.check(f"measured <= bound ({kind})", ok, f"{len(times)} times")
    res.values.update(
        f_norm=consts.f_norm, c_mu=consts.c_mu, psi_norm=consts.psi_norm, velocity=consts.velocity
    )
    return res


def empirical_order(ns, errors) -> float:
    """Least-squares slope of -log(error) against log(n)."""
    slope, _ = np.polyfit(np.log(np.asarray(ns, float)), -np.log(np.asarray(errors, float)), 1)
    return float(slope)


def euler_convergence(cfg: dict) -> ExperimentResult:
    spec = lb.random_spec(cfg["sites"], cfg["seed"], n_jumps=cfg["jumps"], time_dependent=True)
    ref = lb.evolve_cocycle(spec, 0.0, cfg["t"], lb.StepControl(cfg["tol"])).matrix
    table = Table(["n", "error_norm"])
    errors = []
    for n in cfg["n"]:
        err = operator_norm(lb.euler_product(spec, cfg["t"], n).matrix - ref)
        errors.append(err)
        table.add(n, err)
    res = ExperimentResult({"euler": table})
    res.check("errors decrease", all(b < a for a, b in zip(errors, errors[1:])))
    if len(errors) >= 2:
        order = empirical_order(cfg["n"], errors)
        res.values["order"] = order
        res.check("empirical order >= 0.9", order >= 0.9, f"order {order:.4f}")
    return res


def cp_certify(cfg: dict) -> ExperimentResult:
    """Choi positivity and unitality of random cocycles; dissipativity of random generators."""
    rng = np.random.default_rng(cfg["seed"])
    control = lb.StepControl(cfg["tol"])
    cocycles = Table(["trial", "sites", "s", "t", "choi_min_eig", "unitality_defect"])
    pairs = Table(["trial", "sites", "t", "dissipativity_min_eig", "dissipativity_identity_error"])
    res = ExperimentResult({"cocycles": cocycles, "dissipativity": pairs})
    choi_min, unital_max = math.inf, 0.0
    for trial in range(cfg["cocycles"]):
        n = trial % cfg["max_sites"] + 1  # cycle through every size
        spec = lb.random_spec(n, rng, time_dependent=True)
        s, t = np.sort(rng.uniform(0.0, cfg["t_max"], 2))
        gamma = lb.evolve_cocycle(spec, s, t, control)
        choi, unital = lb.check_cp(gamma).min_eigenvalue, lb.unitality_defect(gamma)
        cocycles.add(trial, n, s, t, choi, unital)
        choi_min, unital_max = min(choi_min, choi), max(unital_max, unital)
    diss_min, ident_max = math.inf, 0.0
    for trial in range(cfg["trials"]):
        n = int(rng.integers(1, cfg["max_sites"] + 1))
        spec = lb.random_spec(n, rng, n_jumps=int(rng.integers(1, 3)), time_dependent=True)
        a = lb.random_operator(rng, spec.dim)
        r = float(rng.uniform(0.0, cfg["t_max"]))
        defect = lb.dissipativity_defect(spec, r, a)
        diss = float(np.linalg.eigvalsh(0.5 * (defect + defect.conj().T))[0])
        ident = float(np.max(np.abs(defect - lb.jump_commutator_sum(spec, r, a))))
        pairs.add(trial, n, r, diss, ident)
        diss_min, ident_max = min(diss_min, diss), max(ident_max, ident)
    if cfg["cocycles"]:
        res.check("choi min eigenvalue >= -1e-9", choi_min >= -1e-9, f"{choi_min:.3e}")
        res.check("unitality defect <= 1e-9", unital_max <= 1e-9, f"{unital_max:.3e}")
    if cfg["trials"]:
        res.check("dissipativity min eigenvalue >= -1e-10", diss_min >= -1e-10, f"{diss_min:.3e}")
        res.check("dissipativity equals jump commutator sum", ident_max <= 1e-10, f"{ident_max:.3e}")
    res.values.update(choi_min=choi_min, unitality_max=unital_max, dissipativity_min=diss_min,
                      identity_error_max=ident_max)
    return res


_PAULI = {"x": SX, "y": SY, "z": SZ}


def thermo_limit(cfg: dict) -> ExperimentResult:
    def template(labels):
        return dissipative_xx_chain(labels, cfg["coupling"], cfg["dephasing"], cfg["damping"])

    volseq = VolumeSequence.centered_chain(cfg["sizes"], template)
    a = _PAULI[cfg["observable"]]
    decay = DecayFunction(1, cfg["eps_f"], cfg["mu"])
    diffs = convergence_series(volseq, a, (0,), cfg["t"], lb.StepControl(cfg["tol"]))
    bounds = tail_bound(volseq, a, (0,), cfg["t"], decay)
    table = Table(["step", "sites_small", "sites_big", "difference", "tail_bound"])
    for (i, d), bd in zip(diffs, bounds):
        table.add(i, cfg["sizes"][i - 1], cfg["sizes"][i], d, bd)
    res = ExperimentResult({"differences": table})
    vals = [d for _, d in diffs]
    res.check("differences strictly decrease", all(b < a for a, b in zip(vals, vals[1:])))
    res.check("differences within tail bound", all(d <= bd for d, bd in zip(vals, bounds)))
    return res


# ---------------------------------------------------------------- cavity experiments


def maser_params(cfg: dict) -> MicromaserParams:
    return MicromaserParams(
        eps=cfg["eps"], lam=cfg["lam"], tau=cfg["tau"], p=cfg["p"], sigma=cfg["sigma"],
        cutoff=cfg["cutoff"], atom_energy=cfg["atom_energy"],
    )


def initial_cavity_state(params: MicromaserParams, cfg: dict) -> np.ndarray:
    kind = cfg["initial"]
    if kind == "vacuum":
        return fock_state(params.space, 0)
    if kind == "fock":
        if not 0 <= cfg["fock_level"] < params.space.dim:
            raise ValueError("fock_level must lie below the cutoff")
        return fock_state(params.space, cfg["fock_level"])
    return gibbs_state(cfg["beta"], params.eps, params.cutoff)


def _photons(rho, params):
    return float(np.real(np.trace(number_op(params.space) @ rho)))


def maser_photons(cfg: dict) -> ExperimentResult:
    params = maser_params(cfg)
    rho0 = initial_cavity_state(params, cfg)
    n0 = _photons(rho0, params)
    states = iterate_states(cavity_channel(params), rho0, cfg["n"])
    table = Table(["n", "photons_closed", "photons_oracle", "abs_diff"])
    worst = 0.0
    for k, rho in enumerate(states):
        closed, oracle = photon_number_closed(params, k, n0), _photons(rho, params)
        worst = max(worst, abs(closed - oracle))
        table.add(k, closed, oracle, abs(closed - oracle))
    res = ExperimentResult({"photons": table})
    res.check(f"closed form within {cfg['tol']:g}", worst <= cfg["tol"], f"max diff {worst:.3e}")
    res.values["max_abs_diff"] = worst
    if params.sigma > 0:
        res.values["photon_limit"] = photon_number_limit(params)
    return res


def maser_state(cfg: dict) -> ExperimentResult:
    params = maser_params(cfg)
    rho0 = initial_cavity_state(params, cfg)
    rng = np.random.default_rng(cfg["seed"])
    r = cfg["alpha_radius"] * np.sqrt(rng.uniform(0, 1, cfg["alphas"]))
    phi = rng.uniform(0, 2 * math.pi, cfg["alphas"])
    alphas = r * np.exp(1j * phi)
    rho_n = iterate_states(cavity_channel(params), rho0, cfg["n"])[-1]
    cols = ["k", "alpha_re", "alpha_im", "closed_re", "closed_im", "oracle_re", "oracle_im", "abs_diff"]
    leaky = params.sigma > 0
    if leaky:
        cols += ["limit_re", "limit_im"]
    table = Table(cols)
    worst, modulus = 0.0, 0.0
    for k, a in enumerate(alphas):
        closed = characteristic_function(params, cfg["n"], a, rho0)
        oracle = complex(np.trace(weyl_op(params.space, a) @ rho_n))
        worst = max(worst, abs(closed - oracle))
        modulus = max(modulus, abs(closed))
        row = [k, a.real, a.imag, closed.real, closed.imag, oracle.real, oracle.imag, abs(closed - oracle)]
        if leaky:
            lim = limiting_characteristic(params, a, cfg["limit_tol"])
            row += [lim.real, lim.imag]
        table.add(*row)
    res = ExperimentResult({"characteristic": table})
    res.check(f"product formula within {cfg['tol']:g}", worst <= cfg["tol"], f"max diff {worst:.3e}")
    res.check("modulus <= 1", modulus <= 1 + 1e-12, f"max modulus {modulus:.15g}")
    res.values["max_abs_diff"] = worst
    if leaky:
        gibbs = gibbs_state(1.0, params.eps, params.cutoff)
        vac = fock_state(params.space, 0)
        spread = max(
            abs(limiting_characteristic(params, a, cfg["limit_tol"], vac)
                - limiting_characteristic(params, a, cfg["limit_tol"], gibbs))
            for a in alphas
        )
        res.check("limit independent of initial state", spread <= 2 * cfg["limit_tol"], f"{spread:.3e}")
        defect = quasifree_defect(params, cfg["quasifree_radius"], cfg["quasifree_points"])
        res.values.update(limit_spread=spread, quasifree_defect=defect)
    return res


def maser_energy(cfg: dict) -> ExperimentResult:
    params = maser_params(cfg)
    rho0 = initial_cavity_state(params, cfg)
    n0 = _photons(rho0, params)
    atoms = min(cfg["oracle_atoms"], max(cfg["n"], 1))
    oracle = FullSystemOracle(params, atoms)
    states = oracle.run(rho0)
    res = ExperimentResult()
    tol = cfg["tol"]
    nan = math.nan
    if params.sigma == 0:
        table = Table(
            ["n", "step_closed", "step_oracle", "cumulative_closed", "cumulative_oracle",
             "step_reversed_order", "cumulative_reversed_order"]
        )
        start = oracle.energy_after_entry(states, 1)
        worst = 0.0
        for n in range(2, cfg["n"] + 1):
            step = energy_variation_perfect(params, n)
            cum = energy_variation_perfect_cumulative(params, n)
            if n <= atoms + 1:
                step_o = oracle.energy_after_entry(states, n) - oracle.energy_before_exit(states, n - 1)
                cum_o = oracle.energy_after_entry(states, n) - start
                worst = max(worst, abs(step - step_o), abs(cum - cum_o))
            else:
                step_o = cum_o = nan
            table.add(n, step, step_o, cum, cum_o, energy_step_perfect_reversed_order(params, n),
                      energy_cumulative_perfect_reversed_order(params, n))
        res.tables["energy_perfect"] = table
        res.check(f"closed forms match oracle within {tol:g}", worst <= tol, f"max diff {worst:.3e}")
        return res
    table = Table(
        ["n", "in_cavity_closed", "in_cavity_oracle", "jump_closed", "jump_oracle",
         "extended_closed", "extended_oracle", "cumulative_closed", "cumulative_oracle"]
    )
    worst, running, tele = 0.0, 0.0, 0.0
    e0 = oracle.energy_before_exit(states, 0)
    for n in range(1, cfg["n"] + 1):
        rec = energy_variation_leaky(params, n, n0)
        running += rec.extended_step
        tele = max(tele, abs(running - rec.cumulative))
        if n <= atoms:
            inside = oracle.energy_before_exit(states, n) - oracle.energy_after_entry(states, n)
            jump = oracle.energy_after_entry(states, n) - oracle.energy_before_exit(states, n - 1)
            ext = oracle.energy_before_exit(states, n) - oracle.energy_before_exit(states, n - 1)
            cum = oracle.energy_before_exit(states, n) - e0
            worst = max(worst, *(abs(x - y) for x, y in (
                (rec.in_cavity_step, inside), (rec.jump, jump), (rec.extended_step, ext), (rec.cumulative, cum))))
        else:
            inside = jump = ext = cum = nan
        table.add(n, rec.in_cavity_step, inside, rec.jump, jump, rec.extended_step, ext, rec.cumulative, cum)
    res.tables["energy_leaky"] = table
    res.check(f"closed forms match oracle within {tol:g}", worst <= tol, f"max diff {worst:.3e}")
    res.check("cumulative equals sum of extended steps", tele <= 1e-12, f"{tele:.3e}")
    lo, hi = leaky_limit_bounds(params, n0)
    res.values.update(
        limit=leaky_energy_limit(params, n0), pumping_part=leaky_pumping_part(params, n0),
        bound_lower=lo, bound_upper=hi,
    )
    return res


def maser_entropy(cfg: dict) -> ExperimentResult:
    params = maser_params(cfg)
    if params.sigma != 0:
        raise ValueError("maser-entropy needs sigma = 0")
    beta = cfg["beta"]
    rho0 = gibbs_state(beta, params.eps, params.cutoff)
    n0 = _photons(rho0, params)
    atoms = min(cfg["oracle_atoms"], max(cfg["n"], 1))
    oracle = FullSystemOracle(params, atoms)
    states = oracle.run(rho0)
    table = Table(["n", "entropy_closed", "entropy_oracle", "abs_diff"])
    worst, nonneg = 0.0, True
    for n in range(cfg["n"] + 1):
        closed = entropy_production(params, beta, n, n0)
        nonneg &= closed >= -1e-15
        ora = relative_entropy(states[n], states[0]) if n <= atoms else math.nan
        if n <= atoms:
            worst = max(worst, abs(closed - ora))
        table.add(n, closed, ora, abs(closed - ora))
    res = ExperimentResult({"entropy": table})
    res.check(f"closed form within {cfg['tol']:g}", worst <= cfg["tol"], f"max diff {worst:.3e}")
    res.check("entropy production non-negative", nonneg)
    return res


EXPERIMENTS: dict[str, Callable[[dict], ExperimentResult]] = {
    "lr-scan": lr_scan,
    "euler-convergence": euler_convergence,
    "cp-certify": cp_certify,
    "thermo-limit": thermo_limit,
    "maser-photons": maser_photons,
    "maser-state": maser_state,
    "maser-energy": maser_energy,
    "maser-entropy": maser_entropy,
}
