"""Command-line entry points for every workflow.

Subcommands: gen-data, train-winrate, eval-winrate, selfplay-train, arena,
solve-exact, draft (interactive terminal), serve (HTTP session service).
"""
from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np

from .game import DraftState, GameConfig, IllegalActionError, format_draft
from .oracle import MatchDataset, SyntheticOracle, generate_matches, sample_oracle
from .solver import action_values, exact_solve
from .strategies import StrategySpec, build_strategy, load_strategy_spec
from .winrate import NetWinratePredictor, evaluate_metrics, train_winrate, WinrateClassifier


def _load_config(path_or_none, n_heroes: int, rounds: int) -> GameConfig:
    if path_or_none:
        with open(path_or_none) as f:
            return GameConfig.from_dict(json.load(f))
    return GameConfig.standard(n_heroes=n_heroes, rounds=rounds)


def _add_config_flags(p: argparse.ArgumentParser):
    p.add_argument("--config", help="game config JSON file")
    p.add_argument("--heroes", type=int, default=95,
                   help="hero pool size (when no --config)")
    p.add_argument("--rounds", type=int, default=1,
                   help="rounds per series (when no --config)")


def _load_predictor(args, config: GameConfig):
    """Winrate predictor from --winrate checkpoint or --oracle/--oracle-seed."""
    if getattr(args, "winrate", None):
        return NetWinratePredictor.load(args.winrate)
    if getattr(args, "oracle", None):
        return SyntheticOracle.load(args.oracle)
    seed = getattr(args, "oracle_seed", None)
    if seed is None:
        raise SystemExit("one of --winrate, --oracle, --oracle-seed is required")
    return sample_oracle(seed=seed, n_heroes=config.n_heroes,
                         lineup_size=config.picks_per_round // 2)


def cmd_gen_data(args) -> int:
    oracle = (SyntheticOracle.load(args.oracle) if args.oracle
              else sample_oracle(seed=args.oracle_seed, n_heroes=args.heroes,
                                 lineup_size=args.lineup_size))
    ds = generate_matches(oracle, args.matches, args.lineup_size, seed=args.seed)
    ds.save_csv(args.out)
    if args.save_oracle:
        oracle.save(args.save_oracle)
    print(f"wrote {len(ds)} matches to {args.out}")
    return 0


def cmd_train_winrate(args) -> int:
    ds = MatchDataset.load_csv(args.data)
    pred = train_winrate(
        ds, args.heroes, hidden=tuple(args.hidden), lr=args.lr,
        batch_size=args.batch_size, epochs=args.epochs, l2=args.l2,
        seed=args.seed)
    pred.save(args.out)
    last = pred.history[-1] if pred.history else {}
    print(f"trained on {len(ds)} matches; saved to {args.out}")
    if last:
        print(f"final val_loss {last.get('val_loss', float('nan')):.4f}")
    return 0


def cmd_eval_winrate(args) -> int:
    ds = MatchDataset.load_csv(args.data)
    if args.model:
        model = NetWinratePredictor.load(args.model)
    else:
        model = WinrateClassifier(hidden=tuple(args.hidden), lr=args.lr,
                                  batch_size=args.batch_size,
                                  epochs=args.epochs, seed=args.seed)
    metrics = evaluate_metrics(model, ds, args.heroes, k_folds=args.folds,
                               seed=args.seed)
    print(json.dumps(metrics, indent=2, sort_keys=True))
    if args.out:
        with open(args.out, "w") as f:
            json.dump(metrics, f, indent=2, sort_keys=True)
    return 0


def cmd_selfplay_train(args) -> int:
    from .selfplay import TrainingSchedule, training_loop

    config = _load_config(args.config, args.heroes, args.rounds)
    predictor = _load_predictor(args, config)
    schedule = TrainingSchedule(
        games=args.games, search_iterations=args.iterations,
        workers=args.workers, batch_size=args.batch_size, lr=args.lr,
        train_steps_per_game=args.train_steps, seed=args.seed,
        hidden=tuple(args.hidden), long_term=not args.no_long_term)
    t0 = time.perf_counter()

    def progress(games_done, total):
        if args.verbose:
            print(f"selfplay: {games_done}/{total} games", flush=True)

    model, history = training_loop(schedule, predictor, config,
                                   metrics_path=args.metrics,
                                   progress=progress)
    model.save(args.out)
    print(f"trained {args.games} games in {time.perf_counter() - t0:.1f}s; "
          f"saved model to {args.out}")
    return 0


def cmd_arena(args) -> int:
    from .arena import run_tournament

    config = _load_config(args.config, args.heroes, args.rounds)
    predictor = _load_predictor(args, config)
    with open(args.strategies) as f:
        blocks = json.load(f)
    specs = [StrategySpec.from_json(b) for b in blocks]
    report = run_tournament(
        specs, args.games, predictor, config, seed=args.seed,
        progress=(lambda msg: print(msg, flush=True)) if args.verbose else None)
    print(report.render_text())
    if args.out:
        report.save_json(args.out)
    if args.scores_csv:
        report.save_scores_csv(args.scores_csv)
    return 0


def cmd_solve_exact(args) -> int:
    config = _load_config(args.config, args.heroes, args.rounds)
    predictor = _load_predictor(args, config)
    state = DraftState(config)
    if args.picks:
        for h in args.picks.replace("|", ",").split(","):
            state = state.apply(int(h))
    result = exact_solve(config, predictor, state, budget=args.budget)
    print(f"value (player1 view): {result.value:.6f}")
    print(f"optimal actions: {sorted(result.optimal_actions)}")
    print(f"leaf evaluations: {result.leaf_evaluations}")
    if args.action_values:
        vals = action_values(config, predictor, state, budget=args.budget)
        for a in sorted(vals):
            print(f"  action {a}: {vals[a]:.6f}")
    return 0


def cmd_draft(args) -> int:
    config = _load_config(args.config, args.heroes, args.rounds)
    predictor = _load_predictor(args, config)
    spec = (load_strategy_spec(args.engine) if args.engine
            else StrategySpec(kind="longterm_mcts", iterations=args.iterations,
                              checkpoint=args.model))
    engine = build_strategy(spec, seed=args.seed, predictor=predictor,
                            config=config)
    human = args.human_player
    state = DraftState(config)
    print(f"drafting: {config.rounds} round(s), {config.n_heroes} heroes; "
          f"you are player {human + 1}")
    while not state.is_terminal:
        turn = state.acting_player
        legal = state.legal_actions()
        if turn == human:
            print(f"\nround {state.round_index + 1}, your turn. "
                  f"legal: {list(legal)}")
            try:
                line = input("pick> ").strip()
            except EOFError:
                print("\nabandoned")
                return 1
            if line in ("q", "quit"):
                return 1
            try:
                hero = int(line)
                state = state.apply(hero)
            except (ValueError, IllegalActionError) as e:
                print(f"illegal: {e}")
                continue
        else:
            t0 = time.perf_counter()
            hero = engine.pick(state, mode="assistant")
            state = state.apply(hero)
            print(f"\nengine picks {hero} "
                  f"({time.perf_counter() - t0:.2f}s)")
        print(f"draft so far: {format_draft(state)}")
    print("\nfinal draft:", format_draft(state))
    from .game import round_winrates
    for d, phi in enumerate(round_winrates(state, predictor)):
        print(f"round {d + 1}: camp1 winrate {phi:.3f}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    config = _load_config(args.config, args.heroes, args.rounds)
    predictor = _load_predictor(args, config)
    spec = (load_strategy_spec(args.engine) if args.engine
            else StrategySpec(kind="longterm_mcts", iterations=args.iterations,
                              checkpoint=args.model))
    app = create_app(config, predictor, spec, seed=args.seed,
                     static_dir=args.static)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="herodraft", description="best-of-N hero drafting engine")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-data", help="generate synthetic match data")
    p.add_argument("--oracle", help="oracle JSON file")
    p.add_argument("--oracle-seed", type=int, default=0)
    p.add_argument("--heroes", type=int, default=95)
    p.add_argument("--lineup-size", type=int, default=5)
    p.add_argument("--matches", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--save-oracle", help="also write the oracle JSON here")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_gen_data)

    p = sub.add_parser("train-winrate", help="train the win-rate predictor")
    p.add_argument("--data", required=True, help="match CSV")
    p.add_argument("--heroes", type=int, default=95)
    p.add_argument("--hidden", type=int, nargs="*", default=[256, 128])
    p.add_argument("--lr", type=float, default=1e-4)
    p.add_argument("--batch-size", type=int, default=256)
    p.add_argument("--epochs", type=int, default=30)
    p.add_argument("--l2", type=float, default=0.0)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_train_winrate)

    p = sub.add_parser("eval-winrate", help="cross-validated predictor metrics")
    p.add_argument("--data", required=True)
    p.add_argument("--heroes", type=int, default=95)
    p.add_argument("--model", help="fixed predictor checkpoint (else retrain per fold)")
    p.add_argument("--hidden", type=int, nargs="*", default=[256, 128])
    p.add_argument("--lr", type=float, default=1e-4)
    p.add_argument("--batch-size", type=int, default=256)
    p.add_argument("--epochs", type=int, default=30)
    p.add_argument("--folds", type=int, default=10)
    p.add_argument("--out")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_eval_winrate)

    p = sub.add_parser("selfplay-train", help="self-play policy/value training")
    _add_config_flags(p)
    p.add_argument("--winrate", help="winrate predictor checkpoint")
    p.add_argument("--oracle", help="oracle JSON file")
    p.add_argument("--oracle-seed", type=int)
    p.add_argument("--games", type=int, default=200)
    p.add_argument("--iterations", type=int, default=128)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--batch-size", type=int, default=400)
    p.add_argument("--lr", type=float, default=1e-4)
    p.add_argument("--train-steps", type=int, default=4)
    p.add_argument("--hidden", type=int, nargs="*", default=[64, 64])
    p.add_argument("--no-long-term", action="store_true")
    p.add_argument("--metrics", help="JSON-lines metrics output path")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--verbose", action="store_true")
    p.set_defaults(func=cmd_selfplay_train)

    p = sub.add_parser("arena", help="round-robin strategy tournament")
    _add_config_flags(p)
    p.add_argument("--winrate")
    p.add_argument("--oracle")
    p.add_argument("--oracle-seed", type=int)
    p.add_argument("--strategies", required=True,
                   help="JSON list of strategy spec objects")
    p.add_argument("--games", type=int, default=200)
    p.add_argument("--out", help="report JSON path")
    p.add_argument("--scores-csv", help="raw per-game scores CSV path")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--verbose", action="store_true")
    p.set_defaults(func=cmd_arena)

    p = sub.add_parser("solve-exact", help="exhaustive minimax on a small config")
    _add_config_flags(p)
    p.add_argument("--winrate")
    p.add_argument("--oracle")
    p.add_argument("--oracle-seed", type=int)
    p.add_argument("--picks", help="picks already made, e.g. '7,2|0,3'")
    p.add_argument("--budget", type=float, default=1e8)
    p.add_argument("--action-values", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_solve_exact)

    p = sub.add_parser("draft", help="interactive terminal draft vs the engine")
    _add_config_flags(p)
    p.add_argument("--winrate")
    p.add_argument("--oracle")
    p.add_argument("--oracle-seed", type=int)
    p.add_argument("--engine", help="strategy spec JSON file")
    p.add_argument("--model", help="policy/value checkpoint for the default engine")
    p.add_argument("--iterations", type=int, default=16000)
    p.add_argument("--human-player", type=int, default=0, choices=(0, 1))
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_draft)

    p = sub.add_parser("serve", help="HTTP draft-assistant service")
    _add_config_flags(p)
    p.add_argument("--winrate")
    p.add_argument("--oracle")
    p.add_argument("--oracle-seed", type=int)
    p.add_argument("--engine", help="strategy spec JSON file")
    p.add_argument("--model", help="policy/value checkpoint for the default engine")
    p.add_argument("--iterations", type=int, default=16000)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--static", help="directory of browser UI files to serve at /")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if e.code is not None else 0
    try:
        return args.func(args)
    except (ValueError, FileNotFoundError, IllegalActionError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
