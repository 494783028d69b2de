"""Command-line interface.

Subcommands: predict, field, reach-table, pipeline-check, fit, simulate,
serve. Outputs are JSON on stdout (identical to the HTTP service bodies for
the same logical request); domain errors print a machine-readable error JSON
to stderr and exit nonzero.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path

from . import api
from .jsonfmt import dumps

PORT_ENV_VAR = "HMDGEOM_PORT"
DEFAULT_PORT = 8000


def _float_list(text: str) -> list[float]:
    try:
        return [float(part) for part in text.split(",") if part.strip() != ""]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _add_geometry_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--ipd", type=float, default=api.DEFAULT_IPD,
                        help="viewer interpupillary distance in meters (default %(default)s)")
    parser.add_argument("--vid", type=float, default=api.DEFAULT_VID,
                        help="virtual image distance in meters (default %(default)s)")


def _add_error_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--family", default="none",
                        choices=["none", "passthrough", "ipd-iad", "eye-relief", "custom"],
                        help="error preset (default %(default)s)")
    parser.add_argument("--magnitude", type=float, default=None,
                        help="error magnitude in meters; preset default when omitted "
                             "(passthrough 0.055, ipd-iad 0.012, eye-relief 0.03)")
    parser.add_argument("--render-offset", type=_float_list, default=None, metavar="X,Y,Z",
                        help="explicit render-camera offset for --family custom")
    parser.add_argument("--parallax", type=float, default=0.0,
                        help="ocular-parallax CoP offset in meters (default 0, off)")


def _add_grid_flags(parser: argparse.ArgumentParser, defaults: dict) -> None:
    parser.add_argument("--x-min", type=float, default=defaults["x_min"])
    parser.add_argument("--x-max", type=float, default=defaults["x_max"])
    parser.add_argument("--nx", type=int, default=defaults["nx"])
    parser.add_argument("--z-min", type=float, default=defaults["z_min"])
    parser.add_argument("--z-max", type=float, default=defaults["z_max"])
    parser.add_argument("--nz", type=int, default=defaults["nz"])
    parser.add_argument("--y", type=float, default=defaults["y"])


def _scenario_params(args: argparse.Namespace) -> dict:
    params = {"family": args.family, "ipd_m": args.ipd, "vid_m": args.vid,
              "parallax_m": args.parallax}
    if args.magnitude is not None:
        params["magnitude_m"] = args.magnitude
    if args.family == "custom":
        if args.render_offset is None:
            raise api.ApiError("InvalidRequest", "--family custom requires --render-offset X,Y,Z")
        params["render_offset_m"] = args.render_offset
    return params


def _grid_params(args: argparse.Namespace) -> dict:
    return {"x_min_m": args.x_min, "x_max_m": args.x_max, "nx": args.nx,
            "z_min_m": args.z_min, "z_max_m": args.z_max, "nz": args.nz, "y_m": args.y}


def _cmd_predict(args: argparse.Namespace) -> dict:
    params = _scenario_params(args)
    if args.target_x != 0.0 or args.target_y != 0.0:
        params["target_m"] = [args.target_x, args.target_y, args.target_z]
    else:
        params["target_z_m"] = args.target_z
    return api.predict(params)


def _cmd_field(args: argparse.Namespace) -> dict | None:
    from . import fields as fieldgen

    params = _scenario_params(args)
    params["grid"] = _grid_params(args)
    if args.out:
        fieldgen.export_field(api.field_object(params), args.format, args.out)
        return {"written_to": args.out, "format": args.format}
    if args.format == "csv":
        sys.stdout.write(fieldgen.render_export(api.field_object(params), "csv"))
        return None
    return api.field(params)


def _cmd_reach_table(args: argparse.Namespace) -> dict:
    params = {"family": args.family, "ipd_m": args.ipd, "vid_m": args.vid,
              "target_m": args.target}
    if args.magnitudes is not None:
        params["magnitudes_m"] = args.magnitudes
    return api.reach_table(params)


def _cmd_pipeline_check(args: argparse.Namespace) -> dict:
    return api.pipeline_check({
        "ipd_m": args.ipd, "vid_m": args.vid,
        "passthrough_m": args.passthrough, "ipd_iad_m": args.ipd_iad,
        "eye_relief_m": args.eye_relief, "grid": _grid_params(args),
    })


def _read_trial_csv(path: str) -> list[dict]:
    """Read `error_m,response` rows into the binned fit payload."""
    pairs = []
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames is None or [f.strip() for f in reader.fieldnames] != ["error_m", "response"]:
            raise api.ApiError("InvalidRequest",
                               f"trial CSV must have header 'error_m,response', got {reader.fieldnames}")
        for row in reader:
            try:
                pairs.append((float(row["error_m"]), int(row["response"])))
            except (TypeError, ValueError):
                raise api.ApiError("InvalidRequest", f"bad trial row: {row!r}")
    from .psychometrics import TrialSet
    try:
        trials = TrialSet.from_responses(pairs)
    except ValueError as exc:
        raise api.ApiError("InvalidRequest", str(exc))
    return [{"x": b.x, "n_total": b.n_total, "n_closer": b.n_closer} for b in trials.bins]


def _cmd_fit(args: argparse.Namespace) -> dict:
    path = args.input
    if path.endswith(".json"):
        with open(path, encoding="utf-8") as handle:
            body = json.load(handle)
        bins = body.get("bins")
    else:
        bins = _read_trial_csv(path)
    return api.fit({"bins": bins, "n_resamples": args.resamples, "seed": args.seed})


def _cmd_simulate(args: argparse.Namespace) -> dict | None:
    params = {"family": args.family, "ipd_m": args.ipd, "vid_m": args.vid,
              "target_z_m": args.target_z, "sigma_m": args.sigma,
              "n_per_level": args.n_per_level, "seed": args.seed}
    if args.levels is not None:
        params["levels_m"] = args.levels
    payload = api.simulate(params)
    if args.json:
        return payload
    lines = ["error_m,response"]
    for b in payload["bins"]:
        lines.extend([f"{b['x']:.9g},1"] * b["n_closer"])
        lines.extend([f"{b['x']:.9g},0"] * (b["n_total"] - b["n_closer"]))
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        return {"written_to": args.out, "format": "csv",
                "n_trials": sum(b["n_total"] for b in payload["bins"])}
    sys.stdout.write(text)
    return None


def _cmd_serve(args: argparse.Namespace) -> None:
    import uvicorn

    from .service import create_app

    port = args.port if args.port is not None else int(os.environ.get(PORT_ENV_VAR, DEFAULT_PORT))
    app = create_app(cors_origins=tuple(args.cors_origin))
    uvicorn.run(app, host=args.host, port=port)
    return None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hmdgeom",
        description="Predict how stereo rendering/viewing errors distort perceived 3D geometry.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("predict", help="perceived position of a single target")
    _add_geometry_flags(p)
    _add_error_flags(p)
    p.add_argument("--target-x", type=float, default=0.0)
    p.add_argument("--target-y", type=float, default=0.0)
    p.add_argument("--target-z", type=float, required=True)
    p.set_defaults(handler=_cmd_predict)

    p = sub.add_parser("field", help="distortion field over a grid")
    _add_geometry_flags(p)
    _add_error_flags(p)
    _add_grid_flags(p, dict(x_min=-0.5, x_max=0.5, nx=21, z_min=0.2, z_max=3.0, nz=29, y=0.0))
    p.add_argument("--out", default=None, help="write to this path instead of stdout")
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.set_defaults(handler=_cmd_field)

    p = sub.add_parser("reach-table", help="reach-bias prediction table")
    _add_geometry_flags(p)
    p.add_argument("--family", default="passthrough",
                   choices=["none", "passthrough", "ipd-iad", "eye-relief"])
    p.add_argument("--target", type=float, default=0.30)
    p.add_argument("--magnitudes", type=_float_list, default=None, metavar="M1,M2,...")
    p.set_defaults(handler=_cmd_reach_table)

    p = sub.add_parser("pipeline-check",
                       help="verify the reprojection chain against the closed form")
    _add_geometry_flags(p)
    p.add_argument("--passthrough", type=float, default=0.055)
    p.add_argument("--ipd-iad", type=float, default=-0.012)
    p.add_argument("--eye-relief", type=float, default=0.03)
    _add_grid_flags(p, dict(api.PIPELINE_GRID_DEFAULTS))
    p.set_defaults(handler=_cmd_pipeline_check)

    p = sub.add_parser("fit", help="fit a psychometric slope to trial data")
    p.add_argument("--input", required=True,
                   help="trial CSV (error_m,response) or binned JSON ({\"bins\": [...]})")
    p.add_argument("--resamples", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(handler=_cmd_fit)

    p = sub.add_parser("simulate", help="simulate a seeded 2IFC observer")
    _add_geometry_flags(p)
    p.add_argument("--family", required=True, choices=["passthrough", "ipd-iad"])
    p.add_argument("--target-z", type=float, required=True)
    p.add_argument("--sigma", type=float, default=0.02)
    p.add_argument("--levels", type=_float_list, default=None, metavar="X1,X2,...")
    p.add_argument("--n-per-level", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="write trial CSV to this path")
    p.add_argument("--json", action="store_true", help="emit the binned JSON instead of CSV")
    p.set_defaults(handler=_cmd_simulate)

    p = sub.add_parser("serve", help="run the JSON-over-HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=None,
                   help=f"port (default ${PORT_ENV_VAR} or {DEFAULT_PORT})")
    p.add_argument("--cors-origin", action="append", default=["*"],
                   help="allowed CORS origin (repeatable)")
    p.set_defaults(handler=_cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        payload = args.handler(args)
    except api.ApiError as exc:
        print(dumps(exc.payload()), file=sys.stderr)
        return 2
    except OSError as exc:
        print(dumps({"error": {"type": "IoFailure", "message": str(exc)}}), file=sys.stderr)
        return 2
    if payload is not None:
        print(dumps(payload))
    return 0


if __name__ == "__main__":
    sys.exit(main())
