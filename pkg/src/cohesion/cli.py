"""Command-line front end: one subcommand per pipeline, reproducible runs.

Every artifact-producing run writes a run.json provenance record with the
effective configuration, library versions, stage timings, and the cohesion
eigenvalues where applicable. The log level is taken from the COHESION_LOG
environment variable.
"""

import dataclasses
import json
import logging
import os
import sys
import time
from pathlib import Path

import click

logger = logging.getLogger("cohesion.cli")


@dataclasses.dataclass
class RunConfig:
    """Effective parameters of one CLI run; round-trips through JSON."""

    subcommand: str
    inputs: list
    output_dir: str
    seed: int
    threads: int
    tau: float
    resize_width: int
    crop_borders: bool
    options: dict

    def to_json(self):
        return json.dumps(dataclasses.asdict(self), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text):
        return cls(**json.loads(text))


def _configure_logging():
    level = os.environ.get("COHESION_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")


def _limit_threads(n):
    if n is None:
        return
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(var, str(n))
    try:
        import threadpoolctl

        threadpoolctl.threadpool_limits(n)
    except ImportError:
        logger.info("threadpoolctl unavailable; thread cap recorded only")


def _write_run_record(outdir, config, timings, extra=None):
    import numpy
    import scipy

    from . import __version__

    record = {
        "config": dataclasses.asdict(config),
        "versions": {
            "cohesion": __version__,
            "numpy": numpy.__version__,
            "scipy": scipy.__version__,
            "python": sys.version.split()[0],
        },
        "timings_seconds": timings,
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S"),
    }
    if extra:
        record.update(extra)
    (Path(outdir) / "run.json").write_text(json.dumps(record, indent=2, sort_keys=True))


def _load_input(path, ctx_obj):
    from . import image_io

    img = image_io.load_image(path)
    crop_box = None
    if ctx_obj["crop_borders"]:
        crop_box = image_io.uniform_border_box(img)
        top, bottom, left, right = crop_box
        img = img[top:bottom, left:right]
    if ctx_obj["resize_width"]:
        img = image_io.resize_to_width(img, ctx_obj["resize_width"])
    return img, crop_box


def _config(ctx, subcommand, inputs, outdir, **options):
    return RunConfig(
        subcommand=subcommand,
        inputs=[str(p) for p in inputs],
        output_dir=str(outdir),
        seed=ctx.obj["seed"],
        threads=ctx.obj["threads"] or 0,
        tau=ctx.obj["tau"],
        resize_width=ctx.obj["resize_width"] or 0,
        crop_borders=ctx.obj["crop_borders"],
        options=options,
    )


@click.group()
@click.option("--tau", type=float, default=1e-5, show_default=True,
              help="Covariance regularizer on the [0,1] channel scale.")
@click.option("--resize-width", type=int, default=200, show_default=True,
              help="Resize inputs to this width (0 disables).")
@click.option("--crop-borders", is_flag=True, default=False,
              help="Strip uniform image borders before processing.")
@click.option("--seed", type=int, default=42, show_default=True)
@click.option("--threads", type=int, default=None,
              help="Cap numeric library threads (default: library defaults).")
@click.pass_context
def main(ctx, tau, resize_width, crop_borders, seed, threads):
    """Object discovery via cohesion-ranked affinity spectra."""
    _configure_logging()
    _limit_threads(threads)
    ctx.ensure_object(dict)
    ctx.obj.update(tau=tau, resize_width=resize_width, crop_borders=crop_borders,
                   seed=seed, threads=threads)


def _fail(message):
    raise click.ClickException(message)


@main.command()
@click.argument("image", type=click.Path())
@click.option("-o", "--output", "outdir", type=click.Path(), default="out",
              show_default=True)
@click.option("--eigs", "n_eigs", type=int, default=2, show_default=True,
              help="Number of leading eigenvectors to combine.")
@click.option("--no-noise-elim", is_flag=True, default=False,
              help="Skip superpixel noise elimination.")
@click.option("--morph", is_flag=True, default=False,
              help="Apply 3x3 morphological opening to the mask.")
@click.option("--threshold", default="otsu", show_default=True,
              help="Mask threshold in [0,1], or 'otsu'.")
@click.option("--superpixels", type=int, default=150, show_default=True)
@click.pass_context
def saliency(ctx, image, outdir, n_eigs, no_noise_elim, morph, threshold, superpixels):
    """Detect the salient object; writes saliency.pgm, mask.png, run.json."""
    from . import image_io
    from .saliency import detect_salient

    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    thresh = None if threshold == "otsu" else float(threshold)
    timings = {}
    try:
        t0 = time.time()
        img, _ = _load_input(image, ctx.obj)
        timings["load"] = time.time() - t0
        t0 = time.time()
        result = detect_salient(
            img, n_eigenvectors=n_eigs, eliminate_noise=not no_noise_elim,
            tau=ctx.obj["tau"], n_superpixels=superpixels, threshold=thresh,
            morphology=morph, seed=ctx.obj["seed"],
        )
        timings["pipeline"] = time.time() - t0
    except (OSError, ValueError, RuntimeError) as exc:
        _fail(str(exc))
    image_io.save_gray(outdir / "saliency.pgm", result.saliency_map, scale=1.0)
    mask_img = result.mask.astype(float) * 255.0
    image_io.save_gray(outdir / "mask.png", mask_img, scale=255.0)
    config = _config(ctx, "saliency", [image], outdir, eigs=n_eigs,
                     noise_elim=not no_noise_elim, morph=morph,
                     threshold=threshold, superpixels=superpixels)
    _write_run_record(outdir, config, timings, extra={
        "cohesion_eigenvalues": [p.eigenvalue for p in result.eigenpairs],
        "mask_threshold": result.threshold,
    })
    click.echo(f"saliency artifacts written to {outdir}")


@main.command()
@click.argument("image", type=click.Path())
@click.option("-o", "--output", "outdir", type=click.Path(), default="out",
              show_default=True)
@click.option("--eigs", "n_single", type=int, default=80, show_default=True)
@click.option("--pairwise", "n_pairwise", type=int, default=6, show_default=True)
@click.option("--canny-low", type=float, default=25.5, show_default=True)
@click.option("--canny-high", type=float, default=51.0, show_default=True)
@click.option("--max-boxes", type=int, default=None)
@click.option("--score-map", type=click.Choice(["e1", "e1e2", "per-source"]),
              default="e1e2", show_default=True)
@click.pass_context
def proposals(ctx, image, outdir, n_single, n_pairwise, canny_low, canny_high,
              max_boxes, score_map):
    """Generate ranked object proposals; writes proposals.csv, run.json."""
    from .proposals import generate_proposals

    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    timings = {}
    try:
        t0 = time.time()
        img, _ = _load_input(image, ctx.obj)
        timings["load"] = time.time() - t0
        t0 = time.time()
        result = generate_proposals(
            img, n_single=n_single, n_pairwise=n_pairwise, canny_low=canny_low,
            canny_high=canny_high, max_boxes=max_boxes, score_map=score_map,
            tau=ctx.obj["tau"], seed=ctx.obj["seed"], image_id=str(image),
        )
        timings["pipeline"] = time.time() - t0
    except (OSError, ValueError, RuntimeError) as exc:
        _fail(str(exc))
    lines = ["left,top,right,bottom,score"]
    lines += [f"{b.left},{b.top},{b.right},{b.bottom},{b.score:.6f}" for b in result]
    (outdir / "proposals.csv").write_text("\n".join(lines) + "\n")
    config = _config(ctx, "proposals", [image], outdir, eigs=n_single,
                     pairwise=n_pairwise, canny_low=canny_low,
                     canny_high=canny_high, max_boxes=max_boxes or 0,
                     score_map=score_map)
    _write_run_record(outdir, config, timings,
                      extra={"n_proposals": len(result)})
    click.echo(f"{len(result)} proposals written to {outdir}")


@main.command()
@click.argument("image", type=click.Path())
@click.option("-o", "--output", "outdir", type=click.Path(), default="out",
              show_default=True)
@click.option("--count", type=int, default=6, show_default=True)
@click.option("--tol", type=float, default=1e-6, show_default=True)
@click.pass_context
def eigs(ctx, image, outdir, count, tol):
    """Write leading eigenvalues (CSV) and per-eigenvector object maps."""
    from . import image_io
    from .affinity import build_affinity
    from .object_maps import eigenvector_to_map, reverse_correct
    from .spectral import object_eigenpairs

    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    timings = {}
    try:
        t0 = time.time()
        img, _ = _load_input(image, ctx.obj)
        h, w = img.shape[:2]
        timings["load"] = time.time() - t0
        t0 = time.time()
        mat = build_affinity(img, tau=ctx.obj["tau"])
        timings["affinity"] = time.time() - t0
        t0 = time.time()
        pairs = object_eigenpairs(mat, count, h, w, tol=tol, seed=ctx.obj["seed"])
        timings["eigensolve"] = time.time() - t0
    except (OSError, ValueError, RuntimeError) as exc:
        _fail(str(exc))
    rows = ["rank,eigenvalue,residual"]
    rows += [f"{i + 1},{p.eigenvalue:.12g},{p.residual:.3e}" for i, p in enumerate(pairs)]
    (outdir / "eigenvalues.csv").write_text("\n".join(rows) + "\n")
    for i, p in enumerate(pairs, start=1):
        m = reverse_correct(eigenvector_to_map(p.vector, w, h))
        image_io.save_gray(outdir / f"map_e{i}.pgm", m, scale=255.0)
    config = _config(ctx, "eigs", [image], outdir, count=count, tol=tol)
    _write_run_record(outdir, config, timings, extra={
        "cohesion_eigenvalues": [p.eigenvalue for p in pairs],
    })
    click.echo(f"eigen artifacts written to {outdir}")


@main.command("affinity-viz")
@click.argument("image", type=click.Path())
@click.option("-o", "--output", "outdir", type=click.Path(), default="out",
              show_default=True)
@click.pass_context
def affinity_viz(ctx, image, outdir):
    """Record per-window corner affinities as a signed-value PGM.

    Values are affinely mapped so that 128 is zero; the mapping is written
    to a sidecar text file.
    """
    import numpy as np

    from . import image_io
    from .affinity import affinity_visualization

    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    timings = {}
    try:
        t0 = time.time()
        img, _ = _load_input(image, ctx.obj)
        viz = affinity_visualization(img, tau=ctx.obj["tau"])
        timings["pipeline"] = time.time() - t0
    except (OSError, ValueError, RuntimeError) as exc:
        _fail(str(exc))
    peak = max(abs(float(viz.min())), abs(float(viz.max())), 1e-12)
    scale = 127.0 / peak
    encoded = np.clip(np.rint(128.0 + viz * scale), 0, 255)
    image_io.save_gray(outdir / "affinity_viz.pgm", encoded, scale=255.0)
    (outdir / "affinity_viz.txt").write_text(
        "signed-value PGM encoding\n"
        f"value = (pixel - 128) / {scale:.9g}\n"
        f"recorded range: [{viz.min():.9g}, {viz.max():.9g}]\n"
    )
    config = _config(ctx, "affinity-viz", [image], outdir)
    _write_run_record(outdir, config, timings)
    click.echo(f"affinity visualization written to {outdir}")


@main.command()
@click.option("--scene", required=True)
@click.option("-o", "--output", "out_path", type=click.Path(), required=True,
              help="Output image path (PNG); mask lands next to it.")
@click.pass_context
def synth(ctx, scene, out_path):
    """Write a named synthetic scene and its ground-truth annotations."""
    from . import image_io
    from .scenes import build_scene

    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    try:
        sc = build_scene(scene)
    except ValueError as exc:
        _fail(str(exc))
    image_io.save_image(out_path, sc.image)
    written = [str(out_path)]
    if sc.mask is not None:
        mask_path = out_path.with_name(out_path.stem + "_mask.png")
        image_io.save_gray(mask_path, sc.mask.astype(float) * 255.0, scale=255.0)
        written.append(str(mask_path))
    if sc.boxes is not None:
        boxes_path = out_path.with_name(out_path.stem + "_boxes.json")
        boxes_path.write_text(json.dumps(
            [{"left": b.left, "top": b.top, "right": b.right, "bottom": b.bottom}
             for b in sc.boxes], indent=2))
        written.append(str(boxes_path))
    config = _config(ctx, "synth", [], out_path.parent, scene=scene)
    _write_run_record(out_path.parent, config, {})
    click.echo("wrote " + ", ".join(written))


@main.command("eval-saliency")
@click.argument("root", type=click.Path())
@click.argument("manifest", type=click.Path())
@click.option("-o", "--output", "outdir", type=click.Path(), default="out",
              show_default=True)
@click.option("--eigs", "n_eigs", type=int, default=2, show_default=True)
@click.option("--no-noise-elim", is_flag=True, default=False)
@click.option("--per-image", is_flag=True, default=False,
              help="Also report per-image averaged precision/recall.")
@click.pass_context
def eval_saliency(ctx, root, manifest, outdir, n_eigs, no_noise_elim, per_image):
    """Evaluate saliency over a mask dataset; writes pr_curve.csv, summary.json."""
    import numpy as np

    from . import evaluation, image_io
    from .saliency import detect_salient

    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    samples, errors = evaluation.load_mask_dataset(root, manifest)
    if not samples:
        _fail("no valid samples in manifest")
    maps, masks, counts, per_image_pr = [], [], [], []
    timings = {}
    t0 = time.time()
    for sample in samples:
        try:
            img, crop_box = _load_input(sample.image_path, ctx.obj)
            gt = evaluation.binarize_mask(image_io.load_gray(sample.mask_path))
            if crop_box is not None:
                top, bottom, left, right = crop_box
                gt = gt[top:bottom, left:right]
            if ctx.obj["resize_width"]:
                gt = evaluation.resize_mask_nearest(gt, ctx.obj["resize_width"])
            if gt.shape != img.shape[:2]:
                raise ValueError(f"mask/image shape mismatch for {sample.image_path}")
            result = detect_salient(img, n_eigenvectors=n_eigs,
                                    eliminate_noise=not no_noise_elim,
                                    tau=ctx.obj["tau"], seed=ctx.obj["seed"])
        except (OSError, ValueError, RuntimeError) as exc:
            logger.error("sample %s failed: %s", sample.image_path, exc)
            errors += 1
            continue
        maps.append(result.saliency_map)
        masks.append(gt)
        tp, fp, fn = evaluation.mask_counts(result.mask, gt)
        counts.append((tp, fp, fn))
        per_image_pr.append((
            tp / (tp + fp) if tp + fp else 1.0,
            tp / (tp + fn) if tp + fn else 0.0,
        ))
    timings["evaluate"] = time.time() - t0
    if not maps:
        _fail("all samples failed")
    curve = evaluation.pr_curve(maps, masks)
    lines = ["threshold,precision,recall"]
    lines += [f"{t},{p:.6f},{r:.6f}" for t, p, r in curve.rows()]
    (outdir / "pr_curve.csv").write_text("\n".join(lines) + "\n")
    summary = evaluation.summarize_saliency(counts)
    summary["n_samples"] = len(maps)
    summary["n_errors"] = errors
    if per_image:
        summary["per_image_precision"] = float(np.mean([p for p, _ in per_image_pr]))
        summary["per_image_recall"] = float(np.mean([r for _, r in per_image_pr]))
    (outdir / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True))
    config = _config(ctx, "eval-saliency", [root, manifest], outdir,
                     eigs=n_eigs, noise_elim=not no_noise_elim, per_image=per_image)
    _write_run_record(outdir, config, timings, extra={"summary": summary})
    click.echo(json.dumps(summary, indent=2, sort_keys=True))


@main.command("eval-proposals")
@click.argument("root", type=click.Path())
@click.argument("manifest", type=click.Path())
@click.option("-o", "--output", "outdir", type=click.Path(), default="out",
              show_default=True)
@click.option("--eigs", "n_single", type=int, default=80, show_default=True)
@click.option("--pairwise", "n_pairwise", type=int, default=6, show_default=True)
@click.option("--iou-threshold", type=float, default=0.5, show_default=True)
@click.option("--max-k", type=int, default=1000, show_default=True)
@click.pass_context
def eval_proposals(ctx, root, manifest, outdir, n_single, n_pairwise,
                   iou_threshold, max_k):
    """Evaluate proposal recall over a box dataset; writes recall_curve.csv."""
    from . import evaluation
    from .proposals import generate_proposals

    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    samples, errors = evaluation.load_box_dataset(root, manifest)
    if not samples:
        _fail("no valid samples in manifest")
    ks = sorted({1, 5, 10, 25, 50, 100, 250, 500, max_k})
    per_sample = []
    timings = {}
    t0 = time.time()
    for sample in samples:
        try:
            img, crop_box = _load_input(sample.image_path, ctx.obj)
            if crop_box is not None or ctx.obj["resize_width"]:
                # Box annotations are defined on the original raster.
                raise ValueError(
                    "box evaluation requires --resize-width 0 and no cropping"
                )
            ps = generate_proposals(img, n_single=n_single, n_pairwise=n_pairwise,
                                    tau=ctx.obj["tau"], seed=ctx.obj["seed"],
                                    image_id=str(sample.image_path))
        except (OSError, ValueError, RuntimeError) as exc:
            logger.error("sample %s failed: %s", sample.image_path, exc)
            errors += 1
            continue
        per_sample.append(
            [evaluation.recall_at_k(ps, sample.boxes, iou_threshold, k) for k in ks]
        )
    timings["evaluate"] = time.time() - t0
    if not per_sample:
        _fail("all samples failed")
    mean_recall = [float(sum(row[i] for row in per_sample) / len(per_sample))
                   for i in range(len(ks))]
    lines = ["k,recall"]
    lines += [f"{k},{r:.6f}" for k, r in zip(ks, mean_recall)]
    (outdir / "recall_curve.csv").write_text("\n".join(lines) + "\n")
    summary = {"recall_at_k": dict(zip(map(str, ks), mean_recall)),
               "iou_threshold": iou_threshold, "n_samples": len(per_sample),
               "n_errors": errors}
    (outdir / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True))
    config = _config(ctx, "eval-proposals", [root, manifest], outdir,
                     eigs=n_single, pairwise=n_pairwise,
                     iou_threshold=iou_threshold, max_k=max_k)
    _write_run_record(outdir, config, timings, extra={"summary": summary})
    click.echo(json.dumps(summary, indent=2, sort_keys=True))


if __name__ == "__main__":
    main()
