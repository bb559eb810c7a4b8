"""
rdm command line: training drivers, encode/decode, sweeps and inspection.

Library errors surface as a one-line `error: ...` on stderr with exit code 1.
"""
import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np
from pydantic import ValidationError

from diffusion.sampler import NetworkDenoiser, NoiseForm, SamplerConfig
from diffusion.trainer import DenoiserTrainer, TrainerSettings
from entropy.fitting import fit_entropy_model, load_fit_state, select_q_for_lambda
from entropy.storage import MAGIC as RDME_MAGIC
from entropy.storage import load_entropy_model, model_from_bytes, save_entropy_model
from numerics.checkpoint import MAGIC as RDMC_MAGIC
from numerics.checkpoint import load_checkpoint, unpack_tensors
from numerics.denoiser import DenoiserParams
from numerics.errors import CheckpointError, InputError, RdmError
from numerics.rng import STREAM_INIT, SeededRng

from .bitstream import MAGIC as RDMB_MAGIC
from .bitstream import BitstreamHeader
from .codec import decode, encode_file
from .config import CONFIG_PATH, CodecConfig
from .images import load_corpus, read_pgm, toy_corpus, write_corpus, write_pgm
from .models import RdPoint, SamplerEvalRow, write_csv
from .plots import write_rd_svg
from .sweep import DISTRIBUTIONS, eval_sampler, fit_distribution_model, rd_sweep
from .transforms import analysis_transform

logger = logging.getLogger(__name__)

DEFAULT_Q_GRID = [0.2, 0.4, 0.6, 0.8, 1.0, 1.2, 1.4, 1.6, 1.8, 2.0]
DEFAULT_BETAS = [0.0, 0.025, 0.05, 0.075, 0.1, 0.125, 0.15, 0.175, 0.2]


def _images(args, config: CodecConfig) -> List[Tuple[str, np.ndarray]]:
    if args.corpus:
        return load_corpus(args.corpus)
    if args.toy:
        return toy_corpus(args.seed, args.toy, config.images.size)
    raise InputError("give a --corpus directory or a --toy image count")


def _latents(images, config: CodecConfig) -> np.ndarray:
    return np.concatenate([analysis_transform(image, config.images.block) for _, image in images])


def _sampler(args, config: CodecConfig) -> SamplerConfig:
    d = config.sampler
    return SamplerConfig(
        q_0=d.q_0,
        steps=d.steps if args.steps is None else args.steps,
        beta=d.beta if args.beta is None else args.beta,
        noise_form=NoiseForm.parse(args.noise or d.noise),
        seed=args.seed,
    )


def _denoiser(path: Optional[Path], sampler: SamplerConfig):
    if path is None:
        if sampler.steps > 0:
            raise InputError("--denoiser is required when --steps > 0")
        return None
    params, _ = load_checkpoint(path)
    return NetworkDenoiser(params)


def fit_state_path(out: Path) -> Path:
    """Sidecar holding the resumable entropy-fit state next to an RDME file."""
    out = Path(out)
    return out.with_name(out.name + ".state")


def cmd_train_entropy(args, config: CodecConfig) -> int:
    """
    Fit the entropy model and log one operating point per configured lambda.

    Args:
        args: Parsed options; --resume continues from the fit state beside --out.
        config: Loaded codec configuration.

    Returns:
        Exit code 0; the RDME model is written to --out and the fit state to
        its `.state` sidecar.
    """
    images = _images(args, config)
    latents = _latents(images, config)
    r, e = config.rates, config.entropy
    state_path = fit_state_path(args.out)
    resume = None
    if args.resume and state_path.exists():
        resume = load_fit_state(state_path)
    model = fit_entropy_model(
        latents,
        SeededRng(args.seed),
        epochs=args.epochs or e.epochs,
        q_min=r.q_min,
        q_max=r.q_max,
        lr=e.lr,
        batch_size=e.batch_size,
        quiet=args.quiet,
        resume=resume,
        checkpoint_path=state_path,
    )
    grid = np.linspace(r.q_min, r.q_max, 40)
    for lam in r.lambdas:
        q, loss = select_q_for_lambda(model, latents, lam, grid)
        logger.info(f"lambda {lam:g}: operating point q={q:.4f} (loss {loss:.5f})")
    save_entropy_model(args.out, model)
    logger.info(f"saved entropy model {model.model_id:016x} to {args.out}")
    return 0


def cmd_train_denoiser(args, config: CodecConfig) -> int:
    """
    Train the reverse network against a fixed entropy model.

    Args:
        args: Parsed options; --resume continues from the checkpoint at --out.
        config: Loaded codec configuration.

    Returns:
        Exit code 0; the RDMC checkpoint, optimizer state included, is at --out.
    """
    model = load_entropy_model(args.entropy_model)
    latents = _latents(_images(args, config), config)
    d = config.denoiser
    settings = TrainerSettings(
        steps=args.train_steps or d.steps,
        batch_size=d.batch_size,
        lr=d.lr,
        lr_decay_at=d.lr_decay_at,
        weight_decay=d.weight_decay,
        betas=d.betas,
        q_train_min=config.rates.q_train_min,
        log_every=d.log_every,
        checkpoint_every=d.checkpoint_every,
        simulated_fraction=d.simulated_fraction,
    )
    out = Path(args.out)
    state = None
    if args.resume and out.exists():
        params, state = load_checkpoint(out)
        if state is None:
            raise CheckpointError(f"{out} holds no optimizer state to resume from")
    else:
        params = DenoiserParams.initialize(
            latents.shape[1],
            SeededRng(args.seed, STREAM_INIT),
            hidden=d.hidden,
            embed_dims=d.embed_dims,
            q_min=config.rates.q_min,
            max_freq=d.max_freq,
            residual=d.residual,
        )
    trainer = DenoiserTrainer(params, model, latents, args.seed, settings, state)
    trainer.run(checkpoint_path=out, quiet=args.quiet)
    return 0


def cmd_encode(args, config: CodecConfig) -> int:
    """
    Compress one PGM image at scale --q.

    Returns:
        Exit code 0 after writing the RDMB file and printing its bits and bpp.
    """
    model = load_entropy_model(args.entropy_model)
    image = read_pgm(args.input)
    encoded = encode_file(args.out, image, args.q, model)
    print(f"{args.out}: {encoded.bits} bits, {encoded.bpp:.4f} bpp at q_0={args.q:g}")
    return 0


def cmd_decode(args, config: CodecConfig) -> int:
    """
    Reconstruct a PGM image from an RDMB file.

    Args:
        args: Parsed options; sampler flags override the configured defaults.
        config: Loaded codec configuration.

    Returns:
        Exit code 0 after writing the image to --out.
    """
    model = load_entropy_model(args.entropy_model)
    sampler = _sampler(args, config)
    denoiser = _denoiser(args.denoiser, sampler)
    image = decode(Path(args.input).read_bytes(), model, denoiser, sampler, config.images.block)
    write_pgm(args.out, image)
    logger.info(f"decoded {args.input} with {sampler.summary()} to {args.out}")
    return 0


def cmd_rd_sweep(args, config: CodecConfig) -> int:
    """
    Encode and decode every image at every q_0 of the grid.

    Returns:
        Exit code 0; one CSV row per (image, q_0, N) and optionally an SVG plot.
    """
    model = load_entropy_model(args.entropy_model)
    sampler = _sampler(args, config)
    denoiser = _denoiser(args.denoiser, sampler)
    points = rd_sweep(
        _images(args, config),
        args.q or DEFAULT_Q_GRID,
        model,
        denoiser,
        sampler,
        peak=config.images.peak,
        w1_directions=args.w1_directions,
        block=config.images.block,
        quiet=args.quiet,
    )
    write_csv(args.out, RdPoint, points)
    logger.info(f"wrote {len(points)} rows to {args.out}")
    if args.svg:
        write_rd_svg(args.svg, points)
    return 0


def cmd_eval_sampler(args, config: CodecConfig) -> int:
    """
    Sweep beta and noise form against an oracle denoiser on a toy distribution.

    Args:
        args: Parsed options; the entropy-model form uses --entropy-model or a
            model fitted to the distribution.
        config: Loaded codec configuration.

    Returns:
        Exit code 0 after writing one CSV row per (noise form, beta).
    """
    dist = DISTRIBUTIONS[args.distribution]()
    forms = [NoiseForm.parse(f) for f in (args.noise or ["gaussian", "uniform", "entropy"])]
    steps = config.sampler.steps if args.steps is None else args.steps
    q_0 = config.sampler.q_0 if args.q0 is None else args.q0
    model = None
    if args.entropy_model:
        model = load_entropy_model(args.entropy_model)
    elif NoiseForm.ENTROPY_MODEL in forms:
        model = fit_distribution_model(dist, args.seed, config.rates.q_min, config.rates.q_max)
    rows = eval_sampler(
        dist,
        args.distribution,
        args.betas or DEFAULT_BETAS,
        forms,
        steps,
        q_0,
        args.seed,
        samples=args.samples,
        model=model,
        directions=args.directions,
        quiet=args.quiet,
    )
    write_csv(args.out, SamplerEvalRow, rows)
    logger.info(f"wrote {len(rows)} rows to {args.out}")
    return 0


def cmd_make_corpus(args, config: CodecConfig) -> int:
    """Write --count toy textures as PGM files into --out."""
    write_corpus(args.out, toy_corpus(args.seed, args.count, config.images.size))
    return 0


def describe(data: bytes) -> str:
    """One-paragraph summary of an RDMB, RDME or RDMC file."""
    magic = data[:4]
    if magic == RDMB_MAGIC:
        header, _ = BitstreamHeader.from_bytes(data)
        return (
            f"RDMB bitstream: q_0={header.q_0!r}, image {header.width}x{header.height}, "
            f"latent {header.latent_shape}, model {header.model_id:016x}, "
            f"payload {header.payload_length} bytes, {8 * len(data) / header.pixels:.4f} bpp"
        )
    if magic == RDME_MAGIC:
        model = model_from_bytes(data)
        return (
            f"RDME entropy model {model.model_id:016x}: {model.channels} channels, "
            f"q in [{model.q_min:g}, {model.q_max:g}]"
        )
    if magic == RDMC_MAGIC:
        tensors = unpack_tensors(data)
        if "fit.meta" in tensors:
            return (
                f"RDMC entropy fit state: {tensors['fit.mu'].size} channels, "
                f"{int(tensors['fit.meta'][0])} epochs done"
            )
        weights = sum(t.size for name, t in tensors.items() if name.startswith("layers."))
        hyper = tensors.get("optim.hyper")
        step = f", optimizer at step {int(hyper[0])}" if hyper is not None else ""
        return f"RDMC checkpoint: {len(tensors)} tensors, {weights} trainable weights{step}"
    raise InputError(f"unknown file type (magic {magic!r})")


def cmd_inspect(args, config: CodecConfig) -> int:
    """Print a one-line summary of an RDMB, RDME or RDMC file."""
    print(describe(Path(args.input).read_bytes()))
    return 0


def _add_images(p):
    p.add_argument("--corpus", type=Path, help="directory of .pgm images")
    p.add_argument("--toy", type=int, default=0, help="generate this many toy textures instead")


def _add_sampler(p):
    p.add_argument("--steps", type=int, help="reverse steps N (0 = codec only)")
    p.add_argument("--beta", type=float, help="randomness injection strength")
    p.add_argument("--noise", choices=["gaussian", "uniform", "entropy", "none"])
    p.add_argument("--denoiser", type=Path, help="RDMC denoiser checkpoint")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, default=CONFIG_PATH, help="YAML configuration file")
    common.add_argument("--verbose", "-v", action="store_true", help="debug logging")
    common.add_argument("--quiet", "-q", action="store_true", help="no progress bars")
    common.add_argument("--seed", type=int, default=0, help="64-bit seed for every random stream")

    parser = argparse.ArgumentParser(prog="rdm", description="Rate-variable diffusion codec toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train-entropy", parents=[common], help="fit the per-channel entropy model")
    _add_images(p)
    p.add_argument("--epochs", type=int, help="total epochs, counting those already in a resumed fit")
    p.add_argument("--resume", action="store_true", help="continue from the fit state beside --out")
    p.add_argument("--out", type=Path, required=True, help="RDME output file")
    p.set_defaults(func=cmd_train_entropy)

    p = sub.add_parser("train-denoiser", parents=[common], help="train the reverse network")
    _add_images(p)
    p.add_argument("--entropy-model", type=Path, required=True)
    p.add_argument("--train-steps", type=int, help="total optimizer steps")
    p.add_argument("--resume", action="store_true", help="continue from the checkpoint at --out")
    p.add_argument("--out", type=Path, required=True, help="RDMC checkpoint file")
    p.set_defaults(func=cmd_train_denoiser)

    p = sub.add_parser("encode", parents=[common], help="compress a PGM image")
    p.add_argument("input", type=Path)
    p.add_argument("--entropy-model", type=Path, required=True)
    p.add_argument("--q", type=float, required=True, help="quantization scale q_0")
    p.add_argument("--out", "-o", type=Path, required=True)
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("decode", parents=[common], help="reconstruct a PGM image from a bitstream")
    p.add_argument("input", type=Path)
    p.add_argument("--entropy-model", type=Path, required=True)
    _add_sampler(p)
    p.add_argument("--out", "-o", type=Path, required=True)
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("rd-sweep", parents=[common], help="rate-distortion sweep over q_0")
    _add_images(p)
    p.add_argument("--entropy-model", type=Path, required=True)
    _add_sampler(p)
    p.add_argument("--q", type=float, nargs="+", help="q_0 grid")
    p.add_argument("--w1-directions", type=int, default=0, help="also report sliced W1 with this many projections")
    p.add_argument("--out", type=Path, required=True, help="CSV output")
    p.add_argument("--svg", type=Path, help="also write an SVG RD plot")
    p.set_defaults(func=cmd_rd_sweep)

    p = sub.add_parser("eval-sampler", parents=[common], help="beta / noise-form ablation against oracle denoisers")
    p.add_argument("--distribution", choices=sorted(DISTRIBUTIONS), default="gmm4")
    p.add_argument("--betas", type=float, nargs="+")
    p.add_argument("--noise", nargs="+", choices=["gaussian", "uniform", "entropy", "none"])
    p.add_argument("--steps", type=int)
    p.add_argument("--q0", type=float)
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--directions", type=int, default=64)
    p.add_argument("--entropy-model", type=Path, help="RDME model for entropy noise (fitted when omitted)")
    p.add_argument("--out", type=Path, required=True, help="CSV output")
    p.set_defaults(func=cmd_eval_sampler)

    p = sub.add_parser("make-corpus", parents=[common], help="write toy texture images as PGM")
    p.add_argument("--count", type=int, default=64)
    p.add_argument("--out", type=Path, required=True, help="output directory")
    p.set_defaults(func=cmd_make_corpus)

    p = sub.add_parser("inspect", parents=[common], help="summarize an RDMB, RDME or RDMC file")
    p.add_argument("input", type=Path)
    p.set_defaults(func=cmd_inspect)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="[%(asctime)s] %(levelname)s %(name)s: %(message)s",
    )
    if not args.quiet:
        args.quiet = not sys.stderr.isatty()
    try:
        config = CodecConfig.load_from_yaml(args.config)
        return args.func(args, config)
    except (RdmError, OSError, ValidationError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
