"""Command-line entry point.

Subcommands: render, ablate, shininess-sweep, dice, phantom, serve.
Inline flags override values from config files; ``--print-config`` dumps the
merged scene for reproducibility. Diagnostics go to stderr, data and output
paths to stdout. Exit codes: 0 ok, 1 input error, 2 internal error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import evaluation
from .camera import Camera, VIEW_PRESETS, preset_camera
from .errors import VoxrayError
from .image_io import load_mask_png, save_mask_png
from .ingest import load_volume_file, save_volume_file
from .phantom import generate_phantom, load_phantom_spec
from .raycast import SamplingConfig, render_with_stats
from .shading import ShadingConfig
from .transfer import TransferFunction, grayscale_ramp


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except VoxrayError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {exc!r}", file=sys.stderr)
        return 2


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="voxray", description="Direct volume rendering toolkit"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_render = sub.add_parser("render", help="render a scene to an image file")
    _scene_flags(p_render)
    p_render.add_argument("--out", required=True, help="output image (.png or .ppm)")
    p_render.set_defaults(func=cmd_render)

    p_ablate = sub.add_parser(
        "ablate", help="render all 8 ambient/diffuse/specular on-off combinations"
    )
    _scene_flags(p_ablate)
    p_ablate.add_argument("--out", required=True, help="base output image path")
    p_ablate.set_defaults(func=cmd_ablate)

    p_sweep = sub.add_parser(
        "shininess-sweep", help="render one image per shininess value"
    )
    _scene_flags(p_sweep)
    p_sweep.add_argument("--out", required=True, help="base output image path")
    p_sweep.add_argument(
        "--values", default="5,20,60,200",
        help="comma-separated shininess values (default 5,20,60,200)",
    )
    p_sweep.set_defaults(func=cmd_sweep)

    p_dice = sub.add_parser(
        "dice", help="score thresholded slices against ground-truth masks"
    )
    p_dice.add_argument("--volume", required=True)
    p_dice.add_argument("--meta", default=None)
    p_dice.add_argument("--gt-dir", required=True,
                        help="directory of per-slice 0/255 PNG masks")
    p_dice.add_argument("--axis", default="axial",
                        choices=evaluation.SLICE_AXES)
    p_dice.add_argument("--threshold", type=float, default=0.5)
    p_dice.add_argument("--tf", default=None,
                        help="transfer function JSON; opacity isolates the region")
    p_dice.add_argument("--rendered", action="store_true",
                        help="score a rendered axis view instead of raw slices")
    p_dice.add_argument("--out", required=True, help="output CSV path")
    p_dice.set_defaults(func=cmd_dice)

    p_phantom = sub.add_parser("phantom", help="generate a synthetic volume")
    p_phantom.add_argument("--spec", required=True, help="phantom spec JSON")
    p_phantom.add_argument("--out-dir", required=True)
    p_phantom.add_argument("--name", default="phantom")
    p_phantom.add_argument(
        "--gt-axis", default=None, choices=evaluation.SLICE_AXES,
        help="also write per-slice ground-truth masks along this axis",
    )
    p_phantom.set_defaults(func=cmd_phantom)

    p_serve = sub.add_parser("serve", help="run the interactive render service")
    p_serve.add_argument("--port", type=int, default=8000)
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--data-dir", required=True,
                         help="directory of .raw volumes with .json sidecars")
    p_serve.set_defaults(func=cmd_serve)

    return parser


def _scene_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--volume", required=True, help="RAW volume path")
    p.add_argument("--meta", default=None, help="sidecar JSON (default: <volume>.json)")
    p.add_argument("--tf", default=None, help="transfer function JSON")
    p.add_argument("--shading", default=None, help="shading config JSON")
    p.add_argument("--camera", default=None, help="camera config JSON")
    p.add_argument("--view", default=None, choices=VIEW_PRESETS + ("free",),
                   help="camera preset (default axial unless --camera given)")
    p.add_argument("--width", type=int, default=None)
    p.add_argument("--height", type=int, default=None)
    p.add_argument("--fov", type=float, default=None)
    p.add_argument("--step", type=float, default=None, help="sampling step in mm")
    p.add_argument("--term-alpha", type=float, default=None,
                   help="early ray termination threshold")
    p.add_argument("--background", default=None, help="background color r,g,b")
    p.add_argument("--threads", type=int, default=None)
    # shading overrides
    p.add_argument("--model", default=None, choices=("phong", "cel", "none"))
    p.add_argument("--ambient", type=float, default=None)
    p.add_argument("--diffuse", type=float, default=None)
    p.add_argument("--specular", type=float, default=None)
    p.add_argument("--shininess", type=float, default=None)
    p.add_argument("--cel-bands", type=int, default=None)
    p.add_argument("--light-dir", default=None, help="world light direction x,y,z")
    p.add_argument("--print-config", action="store_true",
                   help="dump the effective scene config as JSON and exit")


def _triple(text: str) -> tuple[float, float, float]:
    parts = [float(v) for v in text.split(",")]
    if len(parts) != 3:
        raise VoxrayError(f"expected three comma-separated numbers, got {text!r}")
    return tuple(parts)


def _load_scene(args):
    grid, meta = load_volume_file(args.volume, args.meta)

    if args.tf is not None:
        tf = TransferFunction.from_json(Path(args.tf).read_text())
    else:
        tf = grayscale_ramp()

    shading_obj = {}
    if args.shading is not None:
        shading_obj = json.loads(Path(args.shading).read_text())
    overrides = {
        "model": args.model,
        "ambient": args.ambient,
        "diffuse": args.diffuse,
        "specular": args.specular,
        "shininess": args.shininess,
        "cel_bands": args.cel_bands,
        "light_dir": _triple(args.light_dir) if args.light_dir else None,
    }
    for key, value in overrides.items():
        if value is not None:
            shading_obj[key] = value
    shading_cfg = ShadingConfig.from_obj(shading_obj)

    sampling_obj = {}
    if args.step is not None:
        sampling_obj["step"] = args.step
    if args.term_alpha is not None:
        sampling_obj["early_termination_alpha"] = args.term_alpha
    if args.background is not None:
        sampling_obj["background"] = _triple(args.background)
    sampling = SamplingConfig.from_obj(sampling_obj)

    width = args.width or 512
    height = args.height or 512
    if args.camera is not None and args.view in (None, "free"):
        cam_obj = json.loads(Path(args.camera).read_text())
        if args.width is not None:
            cam_obj["width"] = args.width
        if args.height is not None:
            cam_obj["height"] = args.height
        if args.fov is not None:
            cam_obj["fov"] = args.fov
        camera = Camera.from_obj(cam_obj)
    else:
        view = args.view if args.view not in (None, "free") else "axial"
        camera = preset_camera(view, grid, width=width, height=height,
                               fov=args.fov if args.fov else 3.0)
    return grid, tf, shading_cfg, sampling, camera


def _print_config(args, grid, tf, shading_cfg, sampling, camera) -> None:
    doc = {
        "volume": str(args.volume),
        "dims": list(grid.dims),
        "camera": camera.to_obj(),
        "sampling": sampling.to_obj(),
        "shading": shading_cfg.to_obj(),
        "tf": tf.to_obj(),
    }
    print(json.dumps(doc, indent=2))


def _render_to(path, grid, tf, shading_cfg, sampling, camera, threads) -> None:
    t0 = time.perf_counter()
    frame, stats = render_with_stats(grid, tf, shading_cfg, sampling, camera, threads)
    millis = (time.perf_counter() - t0) * 1000.0
    frame.save(path)
    print(
        f"rendered {camera.width}x{camera.height} in {millis:.1f} ms: "
        f"{stats.rays} rays, {stats.samples} samples, "
        f"{stats.early_terminations} early terminations",
        file=sys.stderr,
    )
    print(path)


def cmd_render(args) -> int:
    scene = _load_scene(args)
    if args.print_config:
        _print_config(args, *scene)
        return 0
    grid, tf, shading_cfg, sampling, camera = scene
    _render_to(args.out, grid, tf, shading_cfg, sampling, camera, args.threads)
    return 0


_ABLATION_SUFFIXES = {
    (False, False, False): "off",
    (True, False, False): "a",
    (False, True, False): "d",
    (False, False, True): "s",
    (True, True, False): "ad",
    (True, False, True): "as",
    (False, True, True): "ds",
    (True, True, True): "ads",
}


def cmd_ablate(args) -> int:
    scene = _load_scene(args)
    if args.print_config:
        _print_config(args, *scene)
        return 0
    grid, tf, shading_cfg, sampling, camera = scene
    out = Path(args.out)
    for combo, suffix in _ABLATION_SUFFIXES.items():
        on_a, on_d, on_s = combo
        cfg = shading_cfg.with_terms(
            ambient=shading_cfg.ambient if on_a else 0.0,
            diffuse=shading_cfg.diffuse if on_d else 0.0,
            specular=shading_cfg.specular if on_s else 0.0,
        )
        path = out.with_stem(f"{out.stem}_{suffix}")
        _render_to(path, grid, tf, cfg, sampling, camera, args.threads)
    return 0


def cmd_sweep(args) -> int:
    scene = _load_scene(args)
    if args.print_config:
        _print_config(args, *scene)
        return 0
    grid, tf, shading_cfg, sampling, camera = scene
    try:
        values = [float(v) for v in args.values.split(",") if v.strip()]
    except ValueError as exc:
        raise VoxrayError(f"bad --values {args.values!r}: {exc}") from exc
    if not values:
        raise VoxrayError("--values must name at least one shininess value")
    out = Path(args.out)
    from dataclasses import replace

    for n in values:
        cfg = replace(shading_cfg, shininess=n)
        path = out.with_stem(f"{out.stem}_n{n:g}")
        _render_to(path, grid, tf, cfg, sampling, camera, args.threads)
    return 0


def _load_gt_masks(gt_dir: Path) -> list[np.ndarray]:
    files = sorted(Path(gt_dir).glob("*.png"))
    if not files:
        raise VoxrayError(f"no PNG masks found in {gt_dir}")
    return [load_mask_png(f) for f in files]


def cmd_dice(args) -> int:
    grid, _meta = load_volume_file(args.volume, args.meta)
    gt_masks = _load_gt_masks(args.gt_dir)
    tf = (
        TransferFunction.from_json(Path(args.tf).read_text())
        if args.tf is not None
        else None
    )
    if args.rendered:
        scores, mean = evaluation.rendered_dice_curve(
            grid, gt_masks, args.axis, args.threshold, tf or grayscale_ramp()
        )
    else:
        scores, mean = evaluation.dice_curve(
            grid, gt_masks, args.axis, args.threshold, tf
        )
    csv_text = evaluation.dice_csv(scores, mean)
    Path(args.out).write_text(csv_text)
    print(f"mean_dice={mean:.6f} slices={len(scores)}")
    print(args.out)
    return 0


def cmd_phantom(args) -> int:
    spec = load_phantom_spec(args.spec)
    grid, masks = generate_phantom(spec)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    raw_path = out_dir / f"{args.name}.raw"
    save_volume_file(grid, raw_path, sample_type="u8", out_range=(0.0, 255.0))
    print(raw_path)
    print(raw_path.with_suffix(".json"))
    if args.gt_axis:
        for m, mask in enumerate(masks):
            mask_dir = out_dir / f"{args.name}_gt_{m}_{args.gt_axis}"
            mask_dir.mkdir(exist_ok=True)
            extent = evaluation.axis_extent(grid, args.gt_axis)
            for idx in range(extent):
                if args.gt_axis == "axial":
                    sl = mask[idx, :, :]
                elif args.gt_axis == "coronal":
                    sl = mask[:, idx, :]
                else:
                    sl = mask[:, :, idx]
                save_mask_png(mask_dir / f"{idx:04d}.png", sl)
            print(mask_dir)
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(Path(args.data_dir))
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


if __name__ == "__main__":
    sys.exit(main())
