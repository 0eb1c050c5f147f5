"""Command-line client for the solver service.

Every data command builds a JSON request and sends it to the HTTP API; by
default the requests run against an in-process instance of the app, so no
separate server is needed.  Pass --server to target a running deployment,
or use `lsiep serve` to start one.

Exit codes: 0 on success, 1 on solver failure, 2 on configuration errors.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import httpx

CONFIG_ERROR = 2
SOLVER_FAILURE = 1


class ClientError(Exception):
    """Request rejected or failed; carries the process exit code."""

    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _post_asgi(path: str, payload: dict) -> httpx.Response:
    # httpx's ASGI transport is async-only; drive one request per command
    import asyncio

    from .service import app

    async def do_post():
        transport = httpx.ASGITransport(app=app)
        async with httpx.AsyncClient(transport=transport,
                                     base_url="http://lsiep.internal",
                                     timeout=600.0) as client:
            return await client.post(path, json=payload)

    return asyncio.run(do_post())


def _instance_payload(args) -> dict:
    payload = {"kind": args.instance, "seed": args.seed}
    for key in ("n", "l", "m"):
        value = getattr(args, key)
        if value is not None:
            payload[key] = value
    if getattr(args, "chop_decimals", None) is not None:
        payload["chop_decimals"] = args.chop_decimals
    return payload


def _solver_payload(args) -> dict:
    return {
        "zeta": args.zeta,
        "beta": args.beta,
        "sigma": args.sigma,
        "eta_max": args.eta_max,
        "t_hat": args.t_hat,
        "max_outer": args.max_outer,
        "use_preconditioner": not args.no_precond,
    }


def _post(server: str | None, path: str, payload: dict):
    if server:
        with httpx.Client(base_url=server, timeout=600.0) as client:
            response = client.post(path, json=payload)
    else:
        response = _post_asgi(path, payload)
    if response.status_code == 422:
        detail = response.json().get("detail", response.text)
        raise ClientError(CONFIG_ERROR, f"config error: {detail}")
    if response.status_code >= 400:
        raise ClientError(SOLVER_FAILURE,
                          f"solver service error ({response.status_code}): {response.text}")
    return response.json()


def _write_json(path: str | None, doc) -> None:
    if path:
        Path(path).write_text(json.dumps(doc))


def cmd_solve(args) -> int:
    payload = {
        "instance": _instance_payload(args),
        "solver": _solver_payload(args),
        "include_trace": True,
    }
    doc = _post(args.server, "/solve", payload)
    trace = doc.pop("trace", None) or []
    _write_json(args.out, doc)
    if args.trace:
        lines = ["iter,cost,grad_norm,res_norm,cg_iters,l_k,fallback"]
        for row in trace:
            lines.append("{iter},{cost!r},{grad_norm!r},{res_norm!r},"
                         "{cg_iters},{l_k},{fb}".format(fb=int(row["fallback"]), **row))
        Path(args.trace).write_text("\n".join(lines) + "\n")
    err = "" if doc.get("err_c") is None else f" err_c={doc['err_c']:.3e}"
    print(f"status={doc['status']} it={doc['iterations']} nf={doc['nf']} "
          f"ncg={doc['ncg_total']} res={doc['res']:.6e} grad={doc['grad']:.3e}{err}")
    print("c =", json.dumps(doc["c"]))
    return 0 if doc["status"] == "converged" else SOLVER_FAILURE


def cmd_sweep(args) -> int:
    rows = []
    if args.size:
        for triple in args.size:
            try:
                n, l, m = (int(v) for v in triple.split(","))
            except ValueError:
                print(f"config error: bad --size {triple!r}, expected n,l,m",
                      file=sys.stderr)
                return CONFIG_ERROR
            instance = {"kind": args.instance, "n": n, "l": l, "m": m,
                        "seed": args.seed}
            rows.append({"instance": instance, "repeats": args.repeats})
    else:
        rows.append({"instance": _instance_payload(args), "repeats": args.repeats})
    payload = {"rows": rows, "solver": _solver_payload(args)}
    doc = _post(args.server, "/sweep", payload)
    _write_json(args.out, doc)
    header = f"{'row':>3} {'CT':>10} {'IT':>7} {'NF':>7} {'NCG':>8} {'Res':>10} {'grad':>10} {'err-c':>10}"
    print(header)
    failures = 0
    for k, row in enumerate(doc["rows"]):
        failures += row["failures"]
        err = "-" if row["err_c"] is None else f"{row['err_c']:.2e}"
        print(f"{k:>3} {row['ct']:>10.4f} {row['it']:>7.1f} {row['nf']:>7.1f} "
              f"{row['ncg_total']:>8.1f} {row['res']:>10.2e} {row['grad']:>10.2e} {err:>10}")
    return SOLVER_FAILURE if failures else 0


def cmd_surjectivity(args) -> int:
    payload = {
        "instance": _instance_payload(args),
        "at_solution": args.at_solution,
        "solver": _solver_payload(args),
        "rank_tol": args.rank_tol,
        "max_n": args.max_n,
    }
    doc = _post(args.server, "/surjectivity", payload)
    _write_json(args.out, doc)
    print(json.dumps(doc))
    return 0


def cmd_serve(args) -> int:
    import uvicorn
    from .service import app
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def _add_instance_flags(parser, require_kind=True):
    parser.add_argument("--instance", required=require_kind,
                        choices=["example1", "sturm_liouville", "random"],
                        help="instance family")
    parser.add_argument("--n", type=int, default=None)
    parser.add_argument("--l", type=int, default=None)
    parser.add_argument("--m", type=int, default=None)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--chop-decimals", dest="chop_decimals", type=int,
                        default=None, help="start-vector truncation (random kind)")


def _add_solver_flags(parser):
    parser.add_argument("--zeta", type=float, default=1e-8,
                        help="gradient-norm stopping threshold")
    parser.add_argument("--beta", type=float, default=0.5)
    parser.add_argument("--sigma", type=float, default=1e-4)
    parser.add_argument("--eta-max", dest="eta_max", type=float, default=0.01)
    parser.add_argument("--t-hat", dest="t_hat", type=float, default=1e-5)
    parser.add_argument("--max-outer", dest="max_outer", type=int, default=100_000)
    parser.add_argument("--no-precond", action="store_true",
                        help="solve the normal equation with plain CG")


def _add_client_flags(parser):
    parser.add_argument("--server", default=None,
                        help="base URL of a running service (default: in-process)")
    parser.add_argument("--out", default=None, help="write the response JSON here")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lsiep",
        description="Least-squares inverse eigenvalue solver client")
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="run a single solve")
    _add_instance_flags(p_solve)
    _add_solver_flags(p_solve)
    _add_client_flags(p_solve)
    p_solve.add_argument("--trace", default=None,
                         help="write the per-iteration CSV trace here")
    p_solve.set_defaults(func=cmd_solve)

    p_sweep = sub.add_parser("sweep", help="run table-style experiment rows")
    _add_instance_flags(p_sweep)
    _add_solver_flags(p_sweep)
    _add_client_flags(p_sweep)
    p_sweep.add_argument("--size", action="append", default=None,
                         metavar="N,L,M", help="repeatable (n,l,m) row")
    p_sweep.add_argument("--repeats", type=int, default=1)
    p_sweep.set_defaults(func=cmd_sweep)

    p_surj = sub.add_parser("surjectivity",
                            help="rank test of the differential at a point")
    _add_instance_flags(p_surj)
    _add_solver_flags(p_surj)
    _add_client_flags(p_surj)
    p_surj.add_argument("--at-solution", action="store_true",
                        help="solve first, test at the final point")
    p_surj.add_argument("--rank-tol", dest="rank_tol", type=float, default=1e-10)
    p_surj.add_argument("--max-n", dest="max_n", type=int, default=64)
    p_surj.set_defaults(func=cmd_surjectivity)

    p_serve = sub.add_parser("serve", help="start the HTTP service")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8000)
    p_serve.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ClientError as err:
        print(str(err), file=sys.stderr)
        return err.code
    except httpx.HTTPError as err:
        print(f"transport error: {err}", file=sys.stderr)
        return SOLVER_FAILURE


if __name__ == "__main__":
    sys.exit(main())
