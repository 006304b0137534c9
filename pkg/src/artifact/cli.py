"""Command-line front end: JSON on stdout, a short human summary on stderr.

Exit codes: 0 success, 2 usage error, 3 domain error, 4 precision unreachable.
"""

import argparse
import json
import sys

from . import __version__
from .numfield import character_from_label, trivial_character, qq, qstr, NumberField
from .modsym import (cuspidal_subspace, dim_cusp_forms, dim_modular_symbols, sturm_bound)
from .hecke import (get_space, newform_decomposition, get_newform, classify_local,
                    NewformRecord, LocalType)
from .lfun import (PrecisionError, adjoint_series, l_value, local_factor_adjoint,
                   functional_equation_residual, funatone_ratio, fit_sign_conductor,
                   hida_check)
from .congruence import eta_ideal, eta_scaling_check, bad_prime_set, selmer_prediction
from .cosets import verify_relations, modes_agree

EXIT_OK, EXIT_USAGE, EXIT_DOMAIN, EXIT_PRECISION = 0, 2, 3, 4
TABLE_VERSION = 1


class DomainError(Exception):
    pass


def _num(x):
    """Deterministic JSON form of a float."""
    return float("%.15g" % x)


def _sigma(text):
    if not text:
        return ()
    try:
        return tuple(sorted({int(t) for t in text.split(",") if t.strip()}))
    except ValueError:
        raise DomainError("--sigma must be a comma-separated list of primes")


def _character(args):
    if args.character:
        psi = character_from_label(args.character)
        if psi.modulus != args.level:
            raise DomainError("character modulus %d does not match level %d"
                              % (psi.modulus, args.level))
        return psi
    return trivial_character(args.level)


def _need(args, *names):
    for n in names:
        if getattr(args, n) is None:
            raise DomainError("--%s is required" % n.replace("_", "-"))


def _form(args):
    _need(args, "form")
    return get_newform(args.form, args.bound)


# ---------------------------------------------------------------------------
# subcommands

def cmd_space(args):
    _need(args, "level", "weight")
    psi = _character(args)
    N, k = args.level, args.weight
    out = {"level": N, "weight": k, "character": psi.label,
           "cusp_forms_dimension": dim_cusp_forms(N, k, psi),
           "oracle": {"cuspidal_symbols": 2 * dim_cusp_forms(N, k, psi),
                      "modular_symbols": dim_modular_symbols(N, k, psi)}}
    if psi.parity != k % 2:
        out.update({"dimension": 0, "cuspidal_dimension": 0,
                    "note": "character parity differs from the weight parity"})
        return out, "zero space (parity)"
    sp = get_space(N, k, psi)
    out["dimension"] = sp.dim
    C = cuspidal_subspace(sp) if sp.dim else []
    out["cuspidal_dimension"] = C.rank if hasattr(C, "rank") else len(C)
    out["sturm_bound"] = sturm_bound(N, k)
    out["space"] = sp.to_json()
    return out, "dim %d, cuspidal %d" % (out["dimension"], out["cuspidal_dimension"])


def cmd_newforms(args):
    _need(args, "level", "weight")
    psi = _character(args)
    if psi.parity != args.weight % 2:
        recs = []
    else:
        recs = newform_decomposition(get_space(args.level, args.weight, psi))
        if args.bound:
            for r in recs:
                r.extend(args.bound)
    out = {"level": args.level, "weight": args.weight, "character": psi.label,
           "records": [_record_json(r, args.bound) for r in recs]}
    if args.output:
        export_table(recs, args.output, source="artifact %s" % __version__)
        out["exported"] = args.output
    return out, "%d newform orbit(s)" % len(recs)


def _record_json(r, bound=None):
    obj = r.to_json()
    if bound:
        obj["ap"] = [row for row in obj["ap"] if row[0] <= bound]
        obj["bound"] = bound
    return obj


def cmd_local_types(args):
    r = _form(args)
    rows = []
    for p in sorted({p for p in _prime_divisors(r.level)} | set(_sigma(args.sigma))):
        lt = classify_local(r, p)
        fac = local_factor_adjoint(r, p, naive=True)
        rows.append({"p": p, "local_type": lt.to_list(), "adjoint_factor": fac.to_json()})
    return {"form": r.label, "local_types": rows}, "%d prime(s)" % len(rows)


def _prime_divisors(n):
    from .numfield import prime_divisors
    return prime_divisors(n) if n > 1 else []


def _sign_conductor(r, prec):
    if r.level == 1:
        return 1, 1, "hypothesis"
    eps, c, _ = fit_sign_conductor(r)
    return eps, c, "fit"


def cmd_adjoint_l(args):
    r = _form(args)
    prec = args.prec_bits
    eps, c, how = _sign_conductor(r, prec)
    L = adjoint_series(r, conductor=c, sign=eps, prec=prec)
    s = qq(args.s)
    val, B = l_value(L, float(s) if s.q != 1 else int(s), prec)
    out = {"form": r.label, "s": qstr(s), "value": _num(float(val.real.mid())),
           "radius": _num(float(val.real.rad())), "sign": eps, "conductor": c,
           "sign_conductor": how, "terms": B, "precision_bits": prec, "naive": True}
    return out, "L^naive(A_f, %s) = %.12g" % (qstr(s), out["value"])


def cmd_hida_check(args):
    r = _form(args)
    rep = hida_check(r, prec=args.prec_bits)
    rep = {k: (_num(v) if isinstance(v, float) else v) for k, v in rep.items()}
    return rep, "Hida identity %s (relative error %.2e)" % (
        "holds" if rep["pass"] else "FAILS", rep["relative_error"])


def cmd_fe_check(args):
    r = _form(args)
    prec = args.prec_bits
    eps, c, how = _sign_conductor(r, prec)
    L = adjoint_series(r, conductor=c, sign=eps, prec=prec)
    res = functional_equation_residual(L, prec=prec)
    out = {"form": r.label, "sign": eps, "conductor": c, "sign_conductor": how,
           "points": [0.25, 0.5, 0.75], "residual": _num(res), "pass": res <= 1e-6}
    if r.level == 1:
        from math import pi
        ratio = funatone_ratio(L, prec)
        pred = (r.weight - 1) / (2 * pi ** 2)
        out["funatone_ratio"] = _num(float(ratio.real.mid()))
        out["funatone_predicted"] = _num(pred)
        out["funatone_pass"] = abs(float(ratio.real.mid()) - pred) <= 1e-6
    return out, "functional-equation residual %.2e" % res


def cmd_eta(args):
    r = _form(args)
    sigma = _sigma(args.sigma)
    bad = bad_prime_set(r, args.bound or 50)
    e = eta_ideal(r, sigma, seed=args.seed, bad=bad)
    out = e.to_json()
    if args.scaling_prime:
        out["scaling"] = eta_scaling_check(r, sigma, args.scaling_prime, bad)
    return out, "eta for %s, Sigma=%s: %s" % (r.label, list(sigma), out["eta"] or "unit")


def cmd_selmer_predict(args):
    r = _form(args)
    sigma = _sigma(args.sigma)
    bad = bad_prime_set(r, args.bound or 50)
    out = selmer_prediction(r, sigma, bad=bad)
    out["bad_primes"] = bad.to_json()
    return out, "%d prediction row(s)" % len(out["predictions"])


def cmd_coset_verify(args):
    ps = [args.p] if args.p else [2, 3, 5]
    report = []
    for p in ps:
        report.extend(verify_relations(p))
    mism = []
    for p in [q for q in ps if q in (2, 3)]:
        mism.extend(modes_agree(p, args.random_pairs, seed=args.seed or 0))
    ok = all(x["pass"] for x in report) and not mism
    out = {"primes": ps, "report": report, "random_pairs": args.random_pairs,
           "random_mismatches": [repr(m) for m in mism], "pass": ok}
    return out, "%d relation checks, %s" % (len(report), "all pass" if ok else "FAILURES")


def cmd_ingest(args):
    _need(args, "input")
    table = read_table(args.input)
    rows = reconcile(table)
    out = {"source": table["source"], "rows": rows,
           "summary": {"match": sum(r["status"] == "match" for r in rows),
                       "mismatch": sum(r["status"] != "match" for r in rows)}}
    return out, "%d row(s): %d match" % (len(rows), out["summary"]["match"])


# ---------------------------------------------------------------------------
# external newform tables (JSON lines)

def export_table(records, path, source="artifact"):
    """Header line with the fields, then one line per record (fields by index)."""
    polys = []
    lines = []
    for r in records:
        obj = r.to_json()
        poly = obj.pop("field_poly")
        if poly not in polys:
            polys.append(poly)
        obj["field"] = polys.index(poly)
        lines.append(obj)
    with open(path, "w") as fh:
        fh.write(json.dumps({"format": "newform-table", "version": TABLE_VERSION,
                             "source": source, "fields": polys}, sort_keys=True) + "\n")
        for obj in lines:
            fh.write(json.dumps(obj, sort_keys=True) + "\n")


_ROW_KEYS = {"level": int, "weight": int, "character_label": str, "field": int, "ap": list}


def read_table(path):
    """Parse and validate a table; returns {source, fields, records}."""
    with open(path) as fh:
        lines = [ln for ln in fh.read().splitlines()]
    source, polys, records = None, [], []
    for n, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as e:
            raise DomainError("line %d: invalid JSON (%s)" % (n, e.msg))
        if not isinstance(obj, dict):
            raise DomainError("line %d: expected an object" % n)
        if obj.get("format") == "newform-table":
            source = obj.get("source", "external")
            polys = obj.get("fields")
            if not isinstance(polys, list):
                raise DomainError("line %d: header needs a list of field polynomials" % n)
            continue
        if source is None:
            raise DomainError("line %d: row before the header" % n)
        for key, typ in _ROW_KEYS.items():
            if key not in obj or not isinstance(obj[key], typ):
                raise DomainError("line %d: missing or malformed %r" % (n, key))
        if not 0 <= obj["field"] < len(polys):
            raise DomainError("line %d: unknown field index %d" % (n, obj["field"]))
        row = dict(obj)
        row["field_poly"] = polys[row.pop("field")]
        try:
            rec = NewformRecord.from_json(row)
        except (ValueError, KeyError, TypeError, IndexError) as e:
            raise DomainError("line %d: %s" % (n, e))
        d = rec.field.degree
        for ap in obj["ap"]:
            if len(ap) != d + 1:
                raise DomainError("line %d: a_%s is not in the declared field" % (n, ap[0]))
        rec.exceptional = {p: (f, "external") for p, (f, _) in rec.exceptional.items()}
        records.append((n, rec))
    return {"source": source or "external", "fields": polys, "records": records}


def reconcile(table):
    """Match each ingested record with the internally computed newforms."""
    out = []
    for n, rec in table["records"]:
        internal = newform_decomposition(get_space(rec.level, rec.weight, rec.character))
        best = None
        for cand in internal:
            if cand.field.poly != rec.field.poly:
                continue
            bad = []
            for p in sorted(rec.ap):
                if cand.a(p) != rec.ap[p]:
                    bad.append({"p": p, "external": rec.ap[p].to_json(),
                                "internal": cand.a(p).to_json()})
            if best is None or len(bad) < len(best[1]):
                best = (cand, bad)
        row = {"line": n, "level": rec.level, "weight": rec.weight,
               "character": rec.character.label, "compared_up_to": max(rec.ap or [0])}
        if best is None:
            row.update({"status": "mismatch", "reason": "no internal newform with this field"})
        elif best[1]:
            row.update({"status": "mismatch", "label": best[0].label, "mismatches": best[1]})
        else:
            row.update({"status": "match", "label": best[0].label,
                        "exceptional": [[p, f, prov] for p, (f, prov)
                                        in sorted(rec.exceptional.items())]})
        out.append(row)
    return out


# ---------------------------------------------------------------------------

COMMANDS = {
    "space": cmd_space, "newforms": cmd_newforms, "local-types": cmd_local_types,
    "adjoint-l": cmd_adjoint_l, "hida-check": cmd_hida_check, "fe-check": cmd_fe_check,
    "eta": cmd_eta, "selmer-predict": cmd_selmer_predict, "coset-verify": cmd_coset_verify,
    "ingest": cmd_ingest,
}


def build_parser():
    ap = argparse.ArgumentParser(prog="artifact", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--level", type=int)
        sp.add_argument("--weight", type=int)
        sp.add_argument("--character")
        sp.add_argument("--sigma", default="")
        sp.add_argument("--prec-bits", type=int, default=128)
        sp.add_argument("--bound", type=int)
        sp.add_argument("--form")
        sp.add_argument("--input")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--threads", type=int, default=1)
        if name == "newforms":
            sp.add_argument("--output", help="write a JSON-lines table of the records")
        if name == "adjoint-l":
            sp.add_argument("--s", default="1")
        if name == "eta":
            sp.add_argument("--scaling-prime", type=int)
        if name == "coset-verify":
            sp.add_argument("--p", type=int, choices=[2, 3, 5])
            sp.add_argument("--random-pairs", type=int, default=100)
    return ap


def run(argv=None, stdout=None, stderr=None):
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK
    try:
        out, summary = COMMANDS[args.command](args)
    except PrecisionError as e:
        stderr.write("precision unreachable: %s\n" % e)
        return EXIT_PRECISION
    except (DomainError, ValueError, NotImplementedError, KeyError) as e:
        stderr.write("error: %s\n" % e)
        return EXIT_DOMAIN
    stdout.write(json.dumps(out, sort_keys=True) + "\n")
    stderr.write("%s: %s\n" % (args.command, summary))
    return EXIT_OK


def main():
    sys.exit(run())
