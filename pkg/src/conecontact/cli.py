"""Command-line front end.

``conecontact <command> --config run.json [--out DIR]``

Exit codes: 0 success, 1 negative answer (e.g. not contact), 2 bad
configuration or input, 3 solver failure or non-salient problem,
4 a certificate failed independent verification.
"""

import argparse
import json
import os
import sys
import tempfile
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from .band_forms import BandForm, ConstantOneForm, FormatError, pullback_affine
from .cone_structures import (
    DEFAULT_SEED,
    SampledConeStructure,
    cone_from_acs,
    constant_acs,
    standard_acs,
)
from .contact import (
    ContactCandidate,
    MetricField,
    NotContactError,
    ReebACSField,
    extract_contact,
    preset_form,
    symplectization_pfaffians,
    twisted_symplectization,
    verify_contact,
)
from .duality import (
    NotSalient,
    PositiveForm,
    SeparationProblem,
    VerificationError,
    certificate_from_document,
    certificate_to_json,
    separate,
    sha256_file,
    verify_certificate,
)
from .lp import IterationLimitError
from .multilinear import schubert_intersects
from .torus import TorusAction, TorusModel, grid_points

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_SOLVER, EXIT_VERIFY = range(5)
COMMANDS = ("verify-contact", "symplectize", "build-cone", "check-ample", "separate", "roundtrip", "verify")
DEFAULT_TOLERANCES = {"closure": 1e-10, "margin": 0.0, "residual": 1e-8, "pfaffian": 1e-6}


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    base_dir: str
    out_dir: str
    raw: Dict
    model: Optional[TorusModel] = None
    grid: object = 5
    band: int = 1
    tolerances: Dict[str, float] = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    seed: int = DEFAULT_SEED

    @classmethod
    def load(cls, command, path, out_dir=None):
        try:
            with open(path) as fh:
                raw = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
        base = os.path.dirname(os.path.abspath(path))
        cfg = cls(command, base, os.path.abspath(out_dir or raw.get("out", base)), raw)
        if "model" in raw:
            m = raw["model"]
            try:
                cfg.model = TorusModel(int(m["dim"]), int(m.get("band", 0)), m.get("t_axis"))
            except (KeyError, TypeError, ValueError) as exc:
                raise ConfigError(f"bad model spec: {exc}") from exc
        cfg.grid = raw.get("grid", 5)
        sizes = [cfg.grid] if np.isscalar(cfg.grid) else list(cfg.grid)
        if any(not isinstance(n, int) or n < 3 for n in sizes):
            raise ConfigError(f"grid needs >= 3 points per axis, got {cfg.grid!r}")
        cfg.band = int(raw.get("band", 1))
        tol = dict(DEFAULT_TOLERANCES)
        tol.update(raw.get("tolerances", {}))
        for k, v in tol.items():
            if k != "margin" and not float(v) > 0:
                raise ConfigError(f"tolerance {k} must be positive")
        cfg.tolerances = {k: float(v) for k, v in tol.items()}
        cfg.seed = int(raw.get("seed", DEFAULT_SEED))
        return cfg

    def path(self, p):
        return p if os.path.isabs(p) else os.path.join(self.base_dir, p)

    def output(self, key, default):
        name = self.raw.get("outputs", {}).get(key, default)
        return name if os.path.isabs(name) else os.path.join(self.out_dir, name)


def write_atomic(path, text):
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _report(data):
    print(json.dumps(data, indent=2, sort_keys=True, default=float))


# -- config pieces --------------------------------------------------------


def load_form(cfg) -> BandForm:
    spec = cfg.raw.get("form")
    if spec is None:
        raise ConfigError("config needs a 'form' entry")
    if isinstance(spec, str):
        spec = {"path": spec}
    if "preset" in spec:
        try:
            return preset_form(spec["preset"], spec.get("band"))
        except KeyError as exc:
            raise ConfigError(str(exc)) from exc
    try:
        with open(cfg.path(spec["path"])) as fh:
            return BandForm.from_text(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read form: {exc}") from exc


def parse_theta(cfg, model) -> ConstantOneForm:
    spec = cfg.raw.get("theta", "dt")
    if spec == "dt":
        return ConstantOneForm.dt(model)
    if spec in ("zero", 0):
        return ConstantOneForm.zero(model)
    return ConstantOneForm(model, tuple(spec))


def parse_symmetries(cfg, dim) -> List[TorusAction]:
    out = []
    for s in cfg.raw.get("symmetries", []):
        if s.get("preset") == "z+pi":
            shift = np.zeros(dim)
            shift[-1] = np.pi
            out.append(TorusAction.translate(shift, sign=int(s.get("sign", -1)), name="z+pi"))
        else:
            try:
                out.append(TorusAction.from_dict(s))
            except (KeyError, ValueError) as exc:
                raise ConfigError(f"bad symmetry {s!r}: {exc}") from exc
    return out


def _acs_for(cfg, model):
    """(J field, model) from the config's cone spec, or None for file cones."""
    spec = cfg.raw.get("cone", {})
    kind = spec.get("from_acs", "reeb" if "form" in cfg.raw else None)
    if kind == "reeb":
        cand = ContactCandidate(load_form(cfg))
        ext = TorusModel(cand.alpha.dim + 1, cfg.band, 0)
        return ReebACSField(cand, MetricField.identity(cand.alpha.dim)), ext
    if kind == "standard":
        if model is None:
            raise ConfigError("standard J needs a model")
        return constant_acs(standard_acs(model.dim)), model
    return None


def build_cone(cfg):
    """(cone, J or None, source path or None)."""
    spec = cfg.raw.get("cone", {})
    if isinstance(spec, str):
        spec = {"path": spec}
    if "generators" in cfg.raw:
        gens = cfg.raw["generators"]
        if not gens:
            raise ConfigError("empty generator list")
        if cfg.model is None:
            raise ConfigError("inline generators need a model")
        sites: Dict[tuple, list] = {}
        for g in gens:
            sites.setdefault(tuple(float(x) for x in g["point"]), []).append(g["bivector"])
        return SampledConeStructure(cfg.model, tuple(sites.items())), None, None
    if "path" in spec:
        p = cfg.path(spec["path"])
        try:
            with open(p) as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read cone: {exc}") from exc
        return SampledConeStructure.from_text(text, cfg.model), None, p
    acs = _acs_for(cfg, cfg.model)
    if acs is None:
        raise ConfigError("config needs a cone (path, generators, or from_acs)")
    J, model = acs
    grid = cfg.grid
    cone = cone_from_acs(J, model, grid, spec.get("probes", "frame+random"), seed=cfg.seed)
    return cone, J, None


def _csv(points, density, pf):
    m = points.shape[1]
    lines = ["# " + ",".join([f"x{i}" for i in range(m)] + ["density", "pfaffian"])]
    for p, d, f in zip(points, density, pf):
        lines.append(",".join(format(float(v), ".17g") for v in [*p, d, f]))
    return "\n".join(lines) + "\n"


def _base_grid(grid, dim):
    """Grid on M when the configured grid may include the t axis."""
    if np.isscalar(grid):
        return grid
    return list(grid)[1:] if len(grid) == dim + 1 else list(grid)


def _density_csv(alpha, grid):
    grid = _base_grid(grid, alpha.dim)
    cand = ContactCandidate(alpha)
    rep = verify_contact(cand, grid)
    beta = twisted_symplectization(cand)
    pts = np.hstack([np.zeros((len(rep.points), 1)), rep.points])
    pf = symplectization_pfaffians(beta, pts)
    return rep, _csv(rep.points, rep.densities, pf)


# -- commands -------------------------------------------------------------


def cmd_verify_contact(cfg):
    alpha = load_form(cfg)
    rep, csv = _density_csv(alpha, cfg.grid)
    if "csv" in cfg.raw.get("outputs", {}):
        write_atomic(cfg.output("csv", "density.csv"), csv)
    ok = rep.min_abs_density > cfg.tolerances["pfaffian"]
    _report({"command": "verify-contact", "min_abs_density": rep.min_abs_density,
             "integral": rep.integral, "grid": cfg.grid, "contact": ok})
    return EXIT_OK if ok else EXIT_FAIL


def cmd_symplectize(cfg):
    alpha = load_form(cfg)
    beta = twisted_symplectization(ContactCandidate(alpha))
    path = cfg.output("form", "symplectization.form")
    write_atomic(path, beta.to_text())
    pts = grid_points(beta.dim, cfg.grid)
    pf = symplectization_pfaffians(beta, pts)
    ok = float(np.abs(pf).min()) > cfg.tolerances["pfaffian"]
    _report({"command": "symplectize", "output": path, "min_abs_pfaffian": float(np.abs(pf).min()),
             "nondegenerate": ok})
    return EXIT_OK if ok else EXIT_FAIL


def cmd_build_cone(cfg):
    cone, _, _ = build_cone(cfg)
    path = cfg.output("cone", "cone.txt")
    write_atomic(path, cone.to_text())
    _report({"command": "build-cone", "output": path, "sites": len(cone.sites),
             "generators": cone.n_generators})
    return EXIT_OK


def cmd_check_ample(cfg):
    cone, J, _ = build_cone(cfg)
    spec = cfg.raw.get("ample", {})
    resolution = int(spec.get("resolution", 360))
    m = cone.model.dim
    rng = np.random.default_rng(cfg.seed)
    taus = spec.get("taus", 5)
    taus = [rng.normal(size=(2, m)) for _ in range(taus)] if isinstance(taus, int) else [np.array(t, float) for t in taus]
    max_sites = int(spec.get("max_sites", 4))
    misses = []
    for s, site in enumerate(cone.sites[:max_sites]):
        for k, tau in enumerate(taus):
            gens = list(site.bivectors)
            if J is not None and spec.get("augment_tau", True):
                Jp = J(site.point)
                extra = cone_from_acs(constant_acs(Jp), cone.model, points=site.point[None], probes=tau)
                gens += extra.sites[0].bivectors
            if schubert_intersects(gens, tau, resolution) is None:
                misses.append({"site": s, "tau": k})
    _report({"command": "check-ample", "resolution": resolution, "taus": len(taus),
             "sites": min(max_sites, len(cone.sites)), "misses": misses})
    return EXIT_OK if not misses else EXIT_FAIL


def _problem(cfg, cone, cone_path, cert_path):
    model = cone.model.with_band(cfg.band)
    theta = parse_theta(cfg, model)
    syms = parse_symmetries(cfg, model.dim)
    if cone_path is None:
        cone_path = cfg.output("cone", "cone.txt")
        write_atomic(cone_path, cone.to_text())
    prov = {
        "cone_file": os.path.relpath(cone_path, os.path.dirname(os.path.abspath(cert_path))),
        "cone_sha256": sha256_file(cone_path),
        "sites": len(cone.sites),
        "generators": cone.n_generators,
        "seed": cfg.seed,
    }
    sector = bool(cfg.raw.get("invariant_sector", model.t_axis is not None))
    return SeparationProblem.from_cone(cone, theta, cfg.band, syms, sector, provenance=prov)


def _solve(problem, cert_path):
    cert = separate(problem)
    report = verify_certificate(cert, problem)
    write_atomic(cert_path, certificate_to_json(cert, problem, report))
    return cert, report


def cmd_separate(cfg):
    cone, _, path = build_cone(cfg)
    cert_path = cfg.output("certificate", "certificate.json")
    problem = _problem(cfg, cone, path, cert_path)
    cert, report = _solve(problem, cert_path)
    out = {"command": "separate", "variant": cert.variant, "certificate": cert_path,
           "residuals": report.residuals}
    if isinstance(cert, PositiveForm):
        out["margin"] = cert.margin
    _report(out)
    return EXIT_SOLVER if isinstance(cert, NotSalient) else EXIT_OK


def _base_action(s: TorusAction) -> TorusAction:
    L = s.linear
    if L[0, 0] != 1 or np.any(L[0, 1:]) or np.any(L[1:, 0]):
        raise ConfigError(f"symmetry {s!r} mixes the t axis with M")
    return TorusAction(L[1:, 1:], s.translation[1:], s.sign)


def cmd_roundtrip(cfg):
    alpha = load_form(cfg)
    cone, _, path = build_cone(cfg)
    cert_path = cfg.output("certificate", "certificate.json")
    problem = _problem(cfg, cone, path, cert_path)
    cert, report = _solve(problem, cert_path)
    out = {"command": "roundtrip", "variant": cert.variant, "certificate": cert_path,
           "input_contact_min_density": verify_contact(
               ContactCandidate(alpha), _base_grid(cfg.grid, alpha.dim)).min_abs_density}
    if isinstance(cert, NotSalient):
        _report(out)
        return EXIT_SOLVER
    if not isinstance(cert, PositiveForm):
        out["result"] = "structure current found; no contact form extracted"
        _report(out)
        return EXIT_FAIL
    ext = extract_contact(cert.omega, tol=cfg.tolerances["residual"])
    write_atomic(cfg.output("form", "extracted.form"), ext.alpha0.to_text())
    rep, csv = _density_csv(ext.alpha0, cfg.grid)
    write_atomic(cfg.output("csv", "density.csv"), csv)
    ok = ext.accepted and rep.min_abs_density > cfg.tolerances["pfaffian"]
    skew = {}
    for s in problem.symmetries:
        if s.sign == -1:
            b = _base_action(s)
            r = (pullback_affine(ext.alpha0, b) + ext.alpha0).max_abs()
            skew[repr(b)] = r
            ok &= r <= cfg.tolerances["residual"]
    out.update({"margin": cert.margin, "extraction_residual": ext.residual,
                "extracted_min_density": rep.min_abs_density, "extracted_integral": rep.integral,
                "skew_residuals": skew, "contact": bool(ok)})
    _report(out)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_verify(cfg):
    """Re-verify a certificate file against the cone file it names."""
    cert_path = cfg.path(cfg.raw.get("certificate", "certificate.json"))
    try:
        with open(cert_path) as fh:
            doc = json.load(fh)
        cert, model, theta, band, syms, sector = certificate_from_document(doc)
    except (OSError, json.JSONDecodeError, KeyError, ValueError) as exc:
        raise ConfigError(f"cannot read certificate: {exc}") from exc
    prov = doc.get("grid_provenance", {})
    cone_path = os.path.join(os.path.dirname(os.path.abspath(cert_path)), prov.get("cone_file", ""))
    if not os.path.isfile(cone_path):
        raise ConfigError(f"certificate names a missing cone file {cone_path}")
    if sha256_file(cone_path) != prov.get("cone_sha256"):
        _report({"command": "verify", "passed": False, "reason": "cone file hash mismatch"})
        return EXIT_VERIFY
    with open(cone_path) as fh:
        cone = SampledConeStructure.from_text(fh.read(), model)
    pts, gens = cone.flat()
    problem = SeparationProblem(model, theta, band, pts, gens, syms, sector)
    report = verify_certificate(cert, problem)
    _report({"command": "verify", "variant": cert.variant, "passed": report.passed,
             "residuals": report.residuals, "worst": report.worst})
    return EXIT_OK if report.passed else EXIT_VERIFY


HANDLERS = {
    "verify-contact": cmd_verify_contact,
    "symplectize": cmd_symplectize,
    "build-cone": cmd_build_cone,
    "check-ample": cmd_check_ample,
    "separate": cmd_separate,
    "roundtrip": cmd_roundtrip,
    "verify": cmd_verify,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="conecontact", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", required=True, help="JSON run configuration")
    parser.add_argument("--out", help="output directory (default: config's 'out' or its folder)")
    args = parser.parse_args(argv)
    try:
        cfg = RunConfig.load(args.command, args.config, args.out)
        return HANDLERS[args.command](cfg)
    except (ConfigError, FormatError) as exc:
        print(f"conecontact: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (IterationLimitError, NotContactError) as exc:
        print(f"conecontact: solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except VerificationError as exc:
        print(f"conecontact: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    except ValueError as exc:
        print(f"conecontact: invalid input: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
