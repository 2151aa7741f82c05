"""Command line: build the orbit complex, run the spectral sequence, compare with stored data.

Subcommands ``domain``, ``homology``, ``pages`` and ``verify``.  Every JSON
document written or printed is canonical (sorted keys, fixed cell order) so two
runs with the same configuration produce identical bytes.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from collections import Counter
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Callable, Sequence

import jsonschema

from .abelianlin import FgAbelianGroup
from .equivss import (
    Family,
    FamilyBranch,
    NoConsistentExtension,
    Presentation,
    SpectralPages,
    chain_candidates,
    detect_family,
    low_degree_check,
    mod_p_dimensions,
    resolve_extensions,
)
from .orbifold import GammaComplex, Wall, build_gamma_complex, equivariant_euler_characteristic, gamma_to_json
from .quadring import RingSpec, class_group_order
from .swanfloor import BoundExceeded, compute_floor, extract_cells

FIXTURE_ENV = "BIANCHIHOM_FIXTURES"
REPORT_SCHEMA = "bianchihom.report/1"
FIXTURE_SCHEMA = "bianchihom.fixture/1"
COEFF_CHOICES = ("Z", "Z2", "Z3", "Z4", "all")
ALL_TAGS = ("Z", "Z2", "Z3", "Z4")
FAMILY_HORIZON = 24

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class FixtureError(ValueError):
    pass


# ---------------------------------------------------------------------------
# configuration


@dataclass
class RunConfig:
    m: int
    coeffs: tuple[str, ...] = ("Z",)
    q_max: int = 12
    norm_ceiling: int = 400
    export_dir: Path | None = None
    fixtures_dir: Path | None = None
    as_json: bool = False
    walls: tuple[Wall, ...] = field(default=())

    def __post_init__(self):
        if self.q_max < 2:
            raise ValueError("q_max must be at least 2")
        if self.norm_ceiling < 1:
            raise ValueError("norm ceiling must be at least 1")
        RingSpec(self.m)

    def describe(self) -> dict:
        return {
            "m": self.m,
            "coeffs": list(self.coeffs),
            "q_max": self.q_max,
            "norm_ceiling": self.norm_ceiling,
            "walls": [w.to_json() for w in self.walls],
        }


def default_fixture_dir() -> Path:
    env = os.environ.get(FIXTURE_ENV)
    if env:
        return Path(env)
    return Path(str(resources.files("bianchihom") / "fixtures"))


def _schema(name: str) -> dict:
    return json.loads((resources.files("bianchihom") / "schemas" / name).read_text())


def fixture_schema() -> dict:
    return _schema("fixture-1.json")


def report_schema() -> dict:
    return _schema("report-1.json")


# ---------------------------------------------------------------------------
# fixtures


@dataclass
class Fixture:
    data: dict

    @property
    def m(self) -> int:
        return self.data["m"]

    @property
    def is_full(self) -> bool:
        return self.data["kind"] == "full"

    def walls(self) -> tuple[Wall, ...]:
        return tuple(Wall.from_json(w) for w in self.data.get("walls", []))

    def homology_family(self) -> Family | None:
        fam = self.data.get("homology", {}).get("family")
        if fam is None:
            return None
        branches = [
            FamilyBranch(b["residue"], b["free_rank"], {t["order"]: (t["c0"], t["c1"]) for t in b["torsion"]})
            for b in fam["branches"]
        ]
        return Family(fam["period"], branches)

    def expected_homology(self, q: int) -> FgAbelianGroup | None:
        hom = self.data.get("homology")
        if hom is None:
            return None
        if str(q) in hom["low"]:
            return FgAbelianGroup.parse(hom["low"][str(q)])
        if q >= hom["family"]["start"]:
            return self.homology_family().value(q)
        return None

    def expected_dimension(self, tag: str, q: int) -> int | None:
        for entry in self.data.get("mod_p", []):
            if entry["coeff"] != tag:
                continue
            if str(q) in entry["low"]:
                return entry["low"][str(q)]
            fam = entry["family"]
            if q < fam["start"]:
                return None
            for b in fam["branches"]:
                if (q - b["residue"]) % fam["period"] == 0 and q >= b["residue"]:
                    return b["c0"] + b["c1"] * ((q - b["residue"]) // fam["period"])
        return None

    def check_invariants(self) -> None:
        d = self.data
        if "chi_terms" in d and sum(Fraction(t) for t in d["chi_terms"]) != 0:
            raise FixtureError(f"m={self.m}: stored mass formula does not sum to zero")
        fams = [d["homology"]["family"]] if "homology" in d else []
        fams += [e["family"] for e in d.get("mod_p", [])]
        for fam in fams:
            if 12 % fam["period"]:
                raise FixtureError(f"m={self.m}: family period {fam['period']} does not divide 12")
            residues = sorted(b["residue"] for b in fam["branches"])
            if residues != list(range(fam["start"], fam["start"] + fam["period"])):
                raise FixtureError(f"m={self.m}: family residues {residues} do not cover one period")


def load_fixture(m: int, directory: Path | None = None) -> Fixture:
    path = Path(directory or default_fixture_dir()) / f"m{m}.json"
    if not path.exists():
        raise FileNotFoundError(f"no fixture for m={m} in {path.parent}")
    data = json.loads(path.read_text())
    jsonschema.validate(data, fixture_schema())
    if data["m"] != m:
        raise FixtureError(f"{path} describes m={data['m']}")
    fx = Fixture(data)
    fx.check_invariants()
    return fx


def try_fixture(m: int, directory: Path | None) -> Fixture | None:
    try:
        return load_fixture(m, directory)
    except FileNotFoundError:
        return None


# ---------------------------------------------------------------------------
# shared computations


def mass_terms(gx: GammaComplex) -> list[str]:
    """Mass-formula summands grouped by dimension and stabilizer order, unreduced."""
    groups: Counter = Counter()
    for dim in range(3):
        for c in gx.cells[dim]:
            if c.stabilizer.is_finite:
                groups[(dim, c.stabilizer.order)] += 1
    out = []
    for (dim, order), count in sorted(groups.items()):
        sign = "-" if dim % 2 else ""
        out.append(f"{sign}{count}" if order == 1 else f"{sign}{count}/{order}")
    return out


def image_kind(pages: SpectralPages, image: Sequence[int]) -> str:
    order = pages.image_order(image)
    if order == 1:
        return "zero"
    if order is not None:
        return f"order:{order}"
    return "primitive" if pages.is_primitive_infinite(image) else "infinite"


def _fraction(x) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def build(config: RunConfig):
    floor = compute_floor(RingSpec(config.m), norm_ceiling=config.norm_ceiling)
    gx = build_gamma_complex(config.m, config.walls, config.norm_ceiling, floor=floor)
    return floor, gx


def domain_summary(gx: GammaComplex, floor) -> dict:
    return {
        "counts": list(gx.counts()),
        "stabilizer_types": [gx.type_multiset(d) for d in range(3)],
        "chi": _fraction(equivariant_euler_characteristic(gx)),
        "chi_terms": mass_terms(gx),
        "singular_points": [[_fraction(p.x), _fraction(p.y)] for p in floor.singular_points()],
        "singular_orbits": sum(1 for c in gx.cells[0] if c.is_singular),
        "class_number": class_group_order(RingSpec(gx.m)),
    }


def pages_report(pages: SpectralPages) -> dict:
    def grid(page: int) -> dict:
        return {f"{p},{q}": str(g) for (p, q), g in sorted(pages.grid(page).items())}

    return {
        "E1": grid(1),
        "E2": grid(2),
        "E3": grid(3),
        "d1": {f"{p},{q}": m for (p, q), m in sorted(pages.d1.items())},
        "d2": {f"{p},{q}": m for (p, q), m in sorted(pages.d2.items())},
        "d2_images": [image_kind(pages, v) for v in pages.d2_images] if pages.coeff.modulus == 0 else None,
    }


def homology_rows(resolved) -> list[dict]:
    return [
        {
            "q": r.q,
            "status": r.status,
            "candidates": [str(c) for c in r.candidates],
            "survivors": [str(c) for c in r.survivors],
        }
        for r in resolved
    ]


def resolve(gx: GammaComplex, q_max: int) -> tuple[dict[str, SpectralPages], list]:
    """All four coefficient runs to q_max + 1, then the integral answer for q <= q_max."""
    pages = {tag: SpectralPages(gx, tag, q_max + 1) for tag in ALL_TAGS}
    return pages, resolve_extensions(pages, q_max + 1)[: q_max + 1]


def family_lines(resolved) -> list[str] | None:
    values = {r.q: r.group for r in resolved if r.group is not None}
    if len(values) != len(resolved):
        return None
    fam = detect_family(values)
    return fam.describe() if fam else None


# ---------------------------------------------------------------------------
# verification


@dataclass
class Check:
    name: str
    passed: bool
    expected: object = None
    actual: object = None

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        if self.passed:
            return f"{tag}  {self.name}"
        return f"{tag}  {self.name}: expected {self.expected}, got {self.actual}"


def _cmp(name: str, expected, actual) -> Check:
    return Check(name, expected == actual, expected, actual)


def verify_structure(fx: Fixture, gx: GammaComplex, floor) -> list[Check]:
    d = fx.data
    out = []
    summary = domain_summary(gx, floor)
    if "orbit_counts" in d:
        out.append(_cmp("orbit counts", d["orbit_counts"], summary["counts"]))
    if "stabilizer_types" in d:
        for dim in range(3):
            out.append(_cmp(f"stabilizer types in dimension {dim}", d["stabilizer_types"][dim], summary["stabilizer_types"][dim]))
    out.append(_cmp("equivariant Euler characteristic", "0/1", summary["chi"]))
    if "chi_terms" in d:
        out.append(_cmp("mass formula summands", sorted(d["chi_terms"]), sorted(summary["chi_terms"])))
    if "singular_orbits" in d:
        out.append(_cmp("singular point orbits", d["singular_orbits"], summary["singular_orbits"]))
    return out


def verify_pages(fx: Fixture, pages: dict[str, SpectralPages]) -> list[Check]:
    d = fx.data
    out = []
    zp = pages.get("Z")
    if zp is not None:
        for label, key in (("E2", "e2"), ("E3", "e3")):
            for entry in d.get(key, []):
                p, q = entry["p"], entry["q"]
                if q > zp.q_max:
                    continue
                got = zp.e2_group(p, q) if key == "e2" else zp.e3[(p, q)]
                out.append(_cmp(f"{label}[{p},{q}] over Z", str(FgAbelianGroup.parse(entry["group"])), str(got)))
        for rule in d.get("d1_ranks", []):
            top = min(rule.get("q_to", zp.q_max), zp.q_max)
            for q in range(rule["q_from"], top + 1, rule["step"]):
                got = zp.d1_primary_rank(1, q, rule["prime"])
                out.append(_cmp(f"d1[1,{q}] {rule['prime']}-primary rank", rule["rank"], got))
        for ed in d.get("elementary_divisors", []):
            got = Counter(zp.d1_elementary_divisors(ed["p"]))
            out.append(
                _cmp(
                    f"d1[{ed['p']},0] elementary divisor {ed['divisor']} multiplicity",
                    {ed["divisor"]: ed["multiplicity"]},
                    dict(got),
                )
            )
    for fact in d.get("d2", []):
        pg = pages.get(fact["coeff"])
        if pg is None:
            continue
        if "images" in fact:
            got = sorted(image_kind(pg, v) for v in pg.d2_images)
            out.append(_cmp(f"d2 images over {fact['coeff']}", sorted(fact["images"]), got))
        if "rank" in fact:
            out.append(_cmp(f"d2 rank over {fact['coeff']}", fact["rank"], pg.d2_rank()))
    for tag in d.get("d2_vanishes", []):
        if tag in pages:
            out.append(_cmp(f"d2 vanishes over {tag}", True, pages[tag].d2_is_zero()))
    return out


def verify_homology(fx: Fixture, pages: dict[str, SpectralPages], resolved) -> list[Check]:
    out = []
    top = resolved[-1].q
    for r in resolved:
        exp = fx.expected_homology(r.q)
        if exp is None:
            continue
        got = str(r.group) if r.group is not None else f"{r.status}: {[str(s) for s in r.survivors]}"
        out.append(_cmp(f"H_{r.q}(Gamma; Z)", str(exp), got))
    fam = fx.homology_family()
    if fam is not None:
        values = {r.q: r.group for r in resolved if r.group is not None}
        detected = detect_family(values) if len(values) == len(resolved) else None
        if detected is None:
            out.append(Check("closed-form family", False, fam.describe(), "no family detected"))
        else:
            horizon = range(3, FAMILY_HORIZON + 1)
            mismatch = [q for q in horizon if detected.value(q) != fam.value(q)]
            out.append(Check("closed-form family", not mismatch, fam.describe(), detected.describe()))
    for tag in ("Z2", "Z3"):
        if tag not in pages:
            continue
        dims = mod_p_dimensions(pages[tag], top)
        for q in range(1, top + 1):
            exp = fx.expected_dimension(tag, q)
            if exp is not None:
                out.append(_cmp(f"dim H_{q}(Gamma; Z/{tag[1:]})", exp, dims[q]))
    pres = fx.data.get("presentation")
    if pres and "Z" in pages:
        rep = low_degree_check(pages["Z"], Presentation(pres["generators"], pres["relators"]))
        out.append(
            Check(
                "low-degree exact sequence",
                rep.consistent,
                f"{rep.abelianization} extends {rep.e_inf_10} by {rep.e_inf_01}",
                [str(c) for c in rep.candidates],
            )
        )
    return out


# ---------------------------------------------------------------------------
# commands


def _emit(config: RunConfig, report: dict, text: list[str], stdout) -> None:
    report = {"schema": REPORT_SCHEMA, **report, "config": config.describe()}
    jsonschema.validate(report, report_schema())
    blob = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if config.export_dir is not None:
        config.export_dir.mkdir(parents=True, exist_ok=True)
        (config.export_dir / f"{report['command']}_m{config.m}.json").write_text(blob)
    if config.as_json:
        stdout.write(blob)
    else:
        stdout.write("\n".join(text) + "\n")


def cmd_domain(config: RunConfig, stdout=sys.stdout) -> int:
    floor, gx = build(config)
    summary = domain_summary(gx, floor)
    ok = summary["chi"] == "0/1" and summary["singular_orbits"] == summary["class_number"] - 1
    v, e, f = summary["counts"]
    text = [
        f"m = {config.m}: {v} vertex orbits, {e} edge orbits, {f} face orbits",
        f"singular points: {len(summary['singular_points'])} in the strip, {summary['singular_orbits']} orbits",
    ]
    for dim, name in enumerate(("vertex", "edge", "face")):
        types = ", ".join(f"{n} x {t}" for t, n in summary["stabilizer_types"][dim].items())
        text.append(f"{name} stabilizers: {types}")
    text.append("chi = " + " + ".join(summary["chi_terms"]).replace("+ -", "- ") + f" = {Fraction(summary['chi'])}")
    if config.export_dir is not None:
        config.export_dir.mkdir(parents=True, exist_ok=True)
        raw = extract_cells(floor)
        (config.export_dir / f"gamma_m{config.m}.json").write_text(json.dumps(gamma_to_json(gx), indent=2, sort_keys=True) + "\n")
        (config.export_dir / f"floor_m{config.m}.json").write_text(json.dumps(raw.to_json(), indent=2, sort_keys=True) + "\n")
        (config.export_dir / f"floor_m{config.m}.obj").write_text(raw.to_obj())
    text.append("ok" if ok else "FAILED: invariant check")
    _emit(config, {"command": "domain", "m": config.m, "ok": ok, "domain": summary}, text, stdout)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_homology(config: RunConfig, stdout=sys.stdout) -> int:
    _, gx = build(config)
    report: dict = {"command": "homology", "m": config.m}
    text = []
    ok = True
    if "Z" in config.coeffs:
        try:
            pages, resolved = resolve(gx, config.q_max)
        except NoConsistentExtension as exc:
            _emit(config, {**report, "ok": False, "error": str(exc)}, [f"FAILED: {exc}"], stdout)
            return EXIT_FAIL
        report["homology"] = homology_rows(resolved)
        report["families"] = family_lines(resolved)
        text.append(f"H_q(PSL2(O_-{config.m}); Z)")
        for r in resolved:
            shown = str(r.group) if r.group is not None else " | ".join(str(s) for s in r.survivors)
            text.append(f"  q = {r.q:2d}: {shown}   [{r.status}]")
            ok = ok and r.status == "Unique"
        if report["families"]:
            text.append("closed form for q >= 3:")
            text += [f"  {line}" for line in report["families"]]
    else:
        pages = {}
    mod_n = {}
    for tag in config.coeffs:
        if tag == "Z":
            continue
        pg = pages.get(tag) or SpectralPages(gx, tag, config.q_max)
        n = pg.coeff.modulus
        if n in (2, 3):
            dims = mod_p_dimensions(pg, config.q_max)
            mod_n[tag] = {str(q): dims[q] for q in range(config.q_max + 1)}
            text.append(f"dim H_q(Gamma; Z/{n}): " + ", ".join(f"q={q}: {dims[q]}" for q in range(1, config.q_max + 1)))
        else:
            cands = {str(q): [str(c) for c in chain_candidates(pg.filtration_pieces(q), exponent=n)] for q in range(config.q_max + 1)}
            mod_n[tag] = cands
            text.append(f"H_q(Gamma; Z/{n}):")
            text += [f"  q = {int(q):2d}: {' | '.join(c)}" for q, c in cands.items()]
    if mod_n:
        report["mod_n"] = mod_n
    report["ok"] = ok
    _emit(config, report, text, stdout)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_pages(config: RunConfig, stdout=sys.stdout) -> int:
    _, gx = build(config)
    tags = config.coeffs
    report = {"command": "pages", "m": config.m, "ok": True, "pages": {}}
    text = []
    for tag in tags:
        pg = SpectralPages(gx, tag, config.q_max)
        report["pages"][tag] = pages_report(pg)
        for page in (2, 3):
            text.append(f"E{page} over {tag} (rows q = {config.q_max}..0, columns p = 0, 1, 2)")
            grid = pg.grid(page)
            for q in range(config.q_max, -1, -1):
                text.append(f"  q={q:2d} | " + " | ".join(f"{str(grid[(p, q)]):>18}" for p in range(3)))
    _emit(config, report, text, stdout)
    return EXIT_OK


def cmd_verify(config: RunConfig, stdout=sys.stdout) -> int:
    fx = load_fixture(config.m, config.fixtures_dir)
    if not config.walls:
        config.walls = fx.walls()
    floor, gx = build(config)
    checks = verify_structure(fx, gx, floor)
    if fx.is_full:
        pages, resolved = resolve(gx, config.q_max)
        checks += verify_pages(fx, pages)
        checks += verify_homology(fx, pages, resolved)
        checks += [_cmp(f"extension resolution at q={r.q}", "Unique", r.status) for r in resolved]
    else:
        pages = {tag: SpectralPages(gx, tag, min(config.q_max, 3)) for tag in fx.data.get("d2_vanishes", ())}
        checks += verify_pages(fx, pages)
    ok = all(c.passed for c in checks)
    text = [c.line() for c in checks]
    text.append(f"{sum(c.passed for c in checks)}/{len(checks)} checks passed for m = {config.m}")
    report = {
        "command": "verify",
        "m": config.m,
        "ok": ok,
        "checks": [{k: _jsonable(v) for k, v in asdict(c).items()} for c in checks],
    }
    _emit(config, report, text, stdout)
    return EXIT_OK if ok else EXIT_FAIL


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


COMMANDS: dict[str, Callable[[RunConfig], int]] = {
    "domain": cmd_domain,
    "homology": cmd_homology,
    "pages": cmd_pages,
    "verify": cmd_verify,
}


# ---------------------------------------------------------------------------
# argument parsing


def _squarefree_m(text: str) -> int:
    try:
        m = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not an integer")
    try:
        RingSpec(m)
    except ValueError:
        raise argparse.ArgumentTypeError(f"m must be a square-free positive integer, got {m}")
    return m


def _positive(minimum: int):
    def parse(text: str) -> int:
        try:
            v = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"{text!r} is not an integer")
        if v < minimum:
            raise argparse.ArgumentTypeError(f"must be at least {minimum}")
        return v

    return parse


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bianchihom", description="Integral homology of PSL2 over imaginary quadratic integers.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-m", type=_squarefree_m, required=True, help="square-free m > 0, the ring is O_-m")
    common.add_argument("--coeff", choices=COEFF_CHOICES, default=None, help="coefficients (default Z; verify uses all)")
    common.add_argument("--qmax", type=_positive(2), default=12, help="top homological degree (default 12)")
    common.add_argument("--norm-ceiling", type=_positive(1), default=400, help="largest N(mu) searched for hemispheres")
    common.add_argument("--export-dir", type=Path, default=None, help="write JSON (and OBJ for domain) here")
    common.add_argument("--fixtures", type=Path, default=None, help=f"fixture directory (default ${FIXTURE_ENV} or the bundled set)")
    common.add_argument("--json", action="store_true", help="print the JSON report instead of text")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, helptext in (
        ("domain", "orbit cells, stabilizers and the mass formula"),
        ("homology", "integral and mod-n homology with extension resolution"),
        ("pages", "E1, E2 and E3 pages with differentials"),
        ("verify", "compare every computed quantity with the stored fixture"),
    ):
        sub.add_parser(name, parents=[common], help=helptext)
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    coeff = args.coeff or ("all" if args.command == "verify" else "Z")
    coeffs = ALL_TAGS if coeff == "all" else (coeff,)
    walls: tuple[Wall, ...] = ()
    if args.command != "verify":
        fx = try_fixture(args.m, args.fixtures)
        if fx is not None:
            walls = fx.walls()
    return RunConfig(
        m=args.m,
        coeffs=coeffs,
        q_max=args.qmax,
        norm_ceiling=args.norm_ceiling,
        export_dir=args.export_dir,
        fixtures_dir=args.fixtures,
        as_json=args.json,
        walls=walls,
    )


def main(argv: Sequence[str] | None = None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    parser = make_parser()
    args = parser.parse_args(argv)
    config = config_from_args(args)
    try:
        return COMMANDS[args.command](config, stdout=stdout)
    except FileNotFoundError as exc:
        print(f"bianchihom: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (BoundExceeded, FixtureError, jsonschema.ValidationError) as exc:
        print(f"bianchihom: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
