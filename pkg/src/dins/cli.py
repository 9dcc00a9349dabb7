"""Command line: ``dins train | eval | inspect | ingest | config``.

Exit codes: 0 ok, 2 configuration error, 3 data error, 4 model error.
"""

from __future__ import annotations

import argparse
import logging
import sys

import numpy as np

from .config import DEFAULTS, dump_config, load_config, make_config
from .contour import format_stroke_graph
from .errors import ConfigError, DataError, DinsError, ModelError
from .detector import TYPE_NAMES
from .features import describe
from .idx import _read, parse_images
from .network import Network
from .persist import check_compatible, load_model, save_model
from .pipeline import evaluate, load_split, train_network
from .report import MetricsReport

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_MODEL = 0, 2, 3, 4

log = logging.getLogger("dins")


def _config(path):
    return load_config(path) if path else make_config()


def _write(text: str, path):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def cmd_train(args) -> int:
    cfg = _config(args.config)
    data = load_split(cfg, "train", args.data_dir, args.size)
    log.info("training on %d images", len(data))
    net = train_network(cfg, data, progress=args.progress)
    save_model(net, args.out)
    if args.eval_test:
        rep = evaluate(net, load_split(cfg, "test", args.data_dir))
    else:
        rep = MetricsReport.empty(sorted(net.rep.z_of))
        rep.detectors, rep.kinds, rep.actions = net.detector_counts(), net.kind_counts(), dict(net.actions)
        rep.seconds = {"train": net.train_seconds}
    _write(rep.to_text(), args.report)
    return EXIT_OK


def cmd_eval(args) -> int:
    net = load_model(args.model)
    cfg = net.config
    if args.config:
        cfg = load_config(args.config)
        check_compatible(net, cfg)
    rep = evaluate(net, load_split(cfg, args.split, args.data_dir, args.size))
    _write(rep.to_text(), args.report)
    return EXIT_OK


def format_concept(con) -> str:
    lines = [f"g {con.g}  k {con.k}  sigma {con.sigma}  c {con.c}  z {con.z}"]
    for i, m in sorted(con.modes.items()):
        win = ",".join(str(v) for v in m.window)
        lines.append(f"  {i:3d} {describe(m.address):<28} parent {m.parent:3d}  window {win:<10} "
                     f"hits {m.hits_a}/{m.hits_i}  w {m.wa}{m.wi}")
    for (a, b), (h, w) in sorted(con.edges.items()):
        lines.append(f"  edge {a}-{b} hits {h} w {w}")
    return "\n".join(lines) + "\n"


def format_map(m) -> str:
    lines = [f"map {m.z1}  detectors {len(m)}  presentations {m.t}"]
    for d in m.trained():
        r, c = divmod(d.a - m.base, m.side)
        sub = "" if d.sub is None else f"  style {d.sub}"
        lines.append(f"  {d.a:6d} ({r:2d},{c:2d}) {d.kind:<11} {d.state:<8} g {d.g:3d}  hits {d.hits}{sub}")
    return "\n".join(lines) + "\n"


def cmd_inspect(args) -> int:
    net = load_model(args.model)
    if args.map is None:
        out = [f"fingerprint {net.fingerprint}", f"presentations {net.presentations}"]
        out += [f"map {z}: {n} detectors" for z, n in net.detector_counts().items()]
        _write("\n".join(out) + "\n", None)
        return EXIT_OK
    if args.map not in net.maps:
        raise DataError(f"no map for label {args.map}")
    m = net.maps[args.map]
    if args.detector is None:
        _write(format_map(m), None)
        return EXIT_OK
    if args.detector not in m.detectors:
        raise DataError(f"map {args.map} has no detector at address {args.detector}")
    _write(format_concept(m.detectors[args.detector].concept), None)
    return EXIT_OK


def _load_image(path, index):
    if str(path).endswith(".npy"):
        return np.load(path)
    images = parse_images(_read(path), str(path))
    if not 0 <= index < len(images):
        raise DataError(f"image index {index} outside 0..{len(images) - 1}")
    return images[index]


def cmd_ingest(args) -> int:
    net = Network(_config(args.config))
    p = net.perceive(_load_image(args.image, args.index), attention=args.attention)
    if p.graph is None:
        _write("empty image\n", None)
        return EXIT_OK
    out = [format_stroke_graph(p.graph).rstrip("\n"), f"groups {len(p.percept.groups)}"]
    for gi, grp in enumerate(p.percept.groups):
        chars = " ".join(describe(m.address) for m in grp.characteristics)
        out.append(f"{gi} {describe(grp.structural.address)} {tuple(grp.structural.window)} {chars}")
    out.append(f"derived {len(p.percept.derived)}")
    out += [describe(m.address) + f" from {m.sources}" for m in p.percept.derived]
    out.append(f"size {p.size}")
    if args.model:
        label, kind, addr = load_model(args.model).recognize(p)
        out.append(f"recognized {label} {TYPE_NAMES.get(kind, 'none')} {addr}")
    _write("\n".join(out) + "\n", None)
    return EXIT_OK


def cmd_config(args) -> int:
    _write(dump_config(_config(args.config) if args.config else DEFAULTS), None)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dins", description="Detector network: train, evaluate and inspect models.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="cmd", required=True)

    t = sub.add_parser("train", help="one pass over the training subset, write a model")
    t.add_argument("--config")
    t.add_argument("--out", required=True, help="model file to write")
    t.add_argument("--report", help="report file (default stdout)")
    t.add_argument("--data-dir", help="directory holding the IDX files named in the config")
    t.add_argument("--size", type=int, help="override subset.train")
    t.add_argument("--eval-test", action="store_true", help="evaluate on the test subset after training")
    t.add_argument("--progress", type=int, default=0, help="log every N images")
    t.set_defaults(func=cmd_train)

    e = sub.add_parser("eval", help="evaluate a model on a dataset subset")
    e.add_argument("--model", required=True)
    e.add_argument("--config", help="check the model against this config and read dataset paths from it")
    e.add_argument("--split", choices=("test", "train"), default="test")
    e.add_argument("--size", type=int)
    e.add_argument("--data-dir")
    e.add_argument("--report")
    e.set_defaults(func=cmd_eval)

    i = sub.add_parser("inspect", help="dump a map's detectors or one detector's concept")
    i.add_argument("--model", required=True)
    i.add_argument("--map", type=int)
    i.add_argument("--detector", type=int, help="detector address")
    i.set_defaults(func=cmd_inspect)

    g = sub.add_parser("ingest", help="run one image through the front end")
    g.add_argument("image", help="IDX image file or .npy array")
    g.add_argument("--index", type=int, default=0)
    g.add_argument("--config")
    g.add_argument("--attention", action="store_true", help="also form derived modes")
    g.add_argument("--model", help="recognize the image with this model")
    g.set_defaults(func=cmd_ingest)

    c = sub.add_parser("config", help="print the full configuration")
    c.add_argument("--config")
    c.set_defaults(func=cmd_config)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except DinsError as exc:
        if isinstance(exc, ConfigError):
            code = EXIT_CONFIG
        elif isinstance(exc, ModelError):
            code = EXIT_MODEL
        else:
            code = EXIT_DATA
        print(f"dins: {type(exc).__name__}: {exc}", file=sys.stderr)
        return code


if __name__ == "__main__":
    sys.exit(main())
