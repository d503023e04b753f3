"""Command-line entry point: prep, design, simulate, serve, analyze, pipeline."""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path

from . import __version__, design as design_mod, simulate as sim_mod
from .analysis import AnalysisConfig, analyze_study
from .analysis.run import write_artifacts
from .design import DesignConfig, PROTOCOL_BTC, PROTOCOL_PTC, read_manifest, write_manifest
from .stimuli import BoostConfig, prepare_tree


def _comma_list(text: str) -> tuple[str, ...]:
    return tuple(part.strip() for part in text.split(",") if part.strip())


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="jndscale", description=__doc__)
    parser.add_argument("--version", action="version", version=f"jndscale {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_prep = sub.add_parser("prep", help="produce boosted stimuli from decoded images")
    p_prep.add_argument("--src-dir", required=True)
    p_prep.add_argument("--out-dir", required=True)
    p_prep.add_argument("--factor", type=float, default=2.0)
    p_prep.add_argument("--no-zoom", action="store_true")

    p_design = sub.add_parser("design", help="generate the triplet-question manifest")
    p_design.add_argument("--protocol", choices=["btc", "ptc", "both"], default="both")
    p_design.add_argument("--seed", type=int, default=0)
    p_design.add_argument("--out", required=True)
    p_design.add_argument("--sources", type=_comma_list, default=None)
    p_design.add_argument("--codecs", type=_comma_list, default=None)
    p_design.add_argument("--batches", type=int, default=10)

    p_sim = sub.add_parser("simulate", help="simulate a crowd campaign over a design")
    p_sim.add_argument("--design", required=True)
    p_sim.add_argument("--truth", default=None, help="ground-truth JSON (default: 0.25 JND/level, gain 2x)")
    p_sim.add_argument("--workers", type=int, required=True, help="workers per protocol")
    p_sim.add_argument("--seed", type=int, default=0)
    p_sim.add_argument("--unreliable-fraction", type=float, default=0.0)
    p_sim.add_argument("--out", required=True)

    p_serve = sub.add_parser("serve", help="run the study HTTP service")
    p_serve.add_argument("--design", required=True)
    p_serve.add_argument("--stimuli-root", default=None)
    p_serve.add_argument("--db", default="study.sqlite")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8000)
    p_serve.add_argument("--quota", type=int, default=None, help="workers per batch")
    p_serve.add_argument("--max-assignments", type=int, default=None)
    p_serve.add_argument("--seed", type=int, default=None)

    p_an = sub.add_parser("analyze", help="reconstruct JND scales from responses")
    p_an.add_argument("--design", required=True)
    p_an.add_argument("--responses", required=True)
    p_an.add_argument("--out-dir", required=True)
    p_an.add_argument("--bootstrap", type=int, default=10_000)
    p_an.add_argument("--seed", type=int, default=0)
    p_an.add_argument("--threshold", type=float, default=0.70)
    p_an.add_argument(
        "--granularity",
        choices=["auto", "global", "per_source", "per_codec", "per_pair"],
        default="auto",
    )
    p_an.add_argument("--aic-likelihood", choices=["thurstone", "residual"], default="thurstone")

    p_pipe = sub.add_parser("pipeline", help="design -> simulate -> analyze from one config file")
    p_pipe.add_argument("--config", required=True, help="JSON config (see README)")
    p_pipe.add_argument("--out-dir", required=True)
    p_pipe.add_argument("--seed", type=int, default=None, help="overrides the config seed")
    return parser


def _design_config(args_sources, args_codecs, n_batches, seed) -> DesignConfig:
    kwargs = {"n_batches": n_batches, "rng_seed": seed}
    if args_sources:
        kwargs["sources"] = args_sources
    if args_codecs:
        kwargs["codecs"] = args_codecs
    return DesignConfig(**kwargs)


def _generate_questions(config: DesignConfig, protocol: str) -> list:
    protocols = {
        "btc": [PROTOCOL_BTC],
        "ptc": [PROTOCOL_PTC],
        "both": [PROTOCOL_BTC, PROTOCOL_PTC],
    }[protocol]
    questions = []
    for proto in protocols:
        questions.extend(design_mod.batch_questions(design_mod.generate_design(config, proto)))
    return questions


def _default_truth(questions) -> sim_mod.GroundTruth:
    sources = sorted({q.source_id for q in questions})
    codecs = sorted(
        {q.left_codec for q in questions if q.left_level > 0}
        | {q.right_codec for q in questions if q.right_level > 0}
    )
    levels = sorted(
        {q.left_level for q in questions if q.left_level > 0}
        | {q.right_level for q in questions if q.right_level > 0}
    )
    return sim_mod.GroundTruth.linear(sources, codecs, levels)


def cmd_prep(args) -> int:
    config = BoostConfig(amplification_factor=args.factor, zoom_enabled=not args.no_zoom)
    produced = prepare_tree(args.src_dir, args.out_dir, config)
    print(f"boosted {len(produced)} stimuli into {args.out_dir}")
    return 0


def cmd_design(args) -> int:
    config = _design_config(args.sources, args.codecs, args.batches, args.seed)
    questions = _generate_questions(config, args.protocol)
    write_manifest(questions, args.out)
    print(f"wrote {len(questions)} questions to {args.out}")
    return 0


def cmd_simulate(args) -> int:
    questions = read_manifest(args.design)
    if args.truth:
        truth = sim_mod.GroundTruth.from_json(Path(args.truth).read_text())
    else:
        truth = _default_truth(questions)
    mix = sim_mod.ReliabilityMix(unreliable_fraction=args.unreliable_fraction)
    table = sim_mod.simulate_campaign(questions, truth, args.workers, mix, seed=args.seed)
    sim_mod.write_responses_csv(table, args.out)
    print(f"wrote {len(table)} responses to {args.out}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import ServiceConfig, create_app

    questions = read_manifest(args.design)
    app = create_app(
        ServiceConfig(
            questions=questions,
            db_path=args.db,
            stimuli_root=args.stimuli_root,
            per_batch_quota=args.quota,
            max_assignments=args.max_assignments,
            rng_seed=args.seed,
        )
    )
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def cmd_analyze(args) -> int:
    questions = read_manifest(args.design)
    responses = sim_mod.read_responses_csv(args.responses)
    config = AnalysisConfig(
        filter_threshold=args.threshold,
        bootstrap_n=args.bootstrap,
        seed=args.seed,
        granularity=args.granularity,
        aic_likelihood=args.aic_likelihood,
    )
    output = analyze_study(responses, questions, config)
    paths = write_artifacts(output, args.out_dir)
    for name, path in paths.items():
        print(f"{name}: {path}")
    return 0


def cmd_pipeline(args) -> int:
    config_path = Path(args.config)
    if not config_path.exists():
        print(f"pipeline: config file not found: {config_path}", file=sys.stderr)
        return 2
    raw = json.loads(config_path.read_text())
    seed = args.seed if args.seed is not None else int(raw.get("seed", 0))
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    design_cfg = DesignConfig(
        sources=tuple(raw.get("sources", DesignConfig.sources)),
        codecs=tuple(raw.get("codecs", DesignConfig.codecs)),
        n_batches=int(raw.get("n_batches", 10)),
        rng_seed=seed,
    )
    protocol = raw.get("protocol", "both")
    stages = raw.get("stages", ["design", "simulate", "analyze"])
    artifacts: dict[str, Path] = {"config": config_path}

    questions = None
    if "design" in stages:
        questions = _generate_questions(design_cfg, protocol)
        manifest_path = out_dir / "manifest.jsonl"
        write_manifest(questions, manifest_path)
        artifacts["manifest"] = manifest_path
        print(f"design: {len(questions)} questions -> {manifest_path}")
    else:
        manifest_path = Path(raw["design_manifest"])
        if not manifest_path.exists():
            print(f"pipeline: design manifest not found: {manifest_path}", file=sys.stderr)
            return 2
        questions = read_manifest(manifest_path)
        artifacts["manifest"] = manifest_path

    responses_path = out_dir / "responses.csv"
    if "simulate" in stages:
        sim_raw = raw.get("simulate", {})
        if "truth" in sim_raw:
            truth = sim_mod.GroundTruth.from_json(Path(sim_raw["truth"]).read_text())
        else:
            truth = _default_truth(questions)
        truth_path = out_dir / "truth.json"
        truth_path.write_text(truth.to_json())
        artifacts["truth"] = truth_path
        mix = sim_mod.ReliabilityMix(
            unreliable_fraction=float(sim_raw.get("unreliable_fraction", 0.0))
        )
        table = sim_mod.simulate_campaign(
            questions, truth, int(sim_raw.get("workers", 30)), mix, seed=seed
        )
        sim_mod.write_responses_csv(table, responses_path)
        artifacts["responses"] = responses_path
        print(f"simulate: {len(table)} responses -> {responses_path}")
    elif "analyze" in stages:
        responses_path = Path(raw["responses"])
        if not responses_path.exists():
            print(f"pipeline: responses file not found: {responses_path}", file=sys.stderr)
            return 2
        artifacts["responses"] = responses_path

    if "analyze" in stages:
        an_raw = raw.get("analyze", {})
        config = AnalysisConfig(
            filter_threshold=float(an_raw.get("threshold", 0.70)),
            bootstrap_n=int(an_raw.get("bootstrap", 1000)),
            seed=seed,
            granularity=an_raw.get("granularity", "auto"),
            aic_likelihood=an_raw.get("aic_likelihood", "thurstone"),
        )
        responses = sim_mod.read_responses_csv(responses_path)
        run_id = hashlib.sha256(
            json.dumps({"seed": seed, "config": raw}, sort_keys=True).encode()
        ).hexdigest()[:16]
        output = analyze_study(responses, questions, config)
        paths = write_artifacts(output, out_dir, run_id=run_id)
        artifacts.update(paths)
        print(f"analyze: artifacts in {out_dir}")

    manifest = {
        "version": __version__,
        "seed": seed,
        "stages": stages,
        "files": {name: {"path": str(p), "sha256": _sha256(Path(p))} for name, p in artifacts.items()},
    }
    body = json.dumps(manifest, indent=2, sort_keys=True)
    manifest["manifest_sha256"] = hashlib.sha256(body.encode()).hexdigest()
    (out_dir / "run_manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    print(f"run manifest: {out_dir / 'run_manifest.json'}")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {
        "prep": cmd_prep,
        "design": cmd_design,
        "simulate": cmd_simulate,
        "serve": cmd_serve,
        "analyze": cmd_analyze,
        "pipeline": cmd_pipeline,
    }
    return handlers[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
