import argparse
import os
import sys
from pathlib import Path


def _parse_args() -> argparse.Namespace:
    p = argparse.ArgumentParser(description="Run the Prefect character sweeps locally")
    p.add_argument(
        "--use-prefect-api",
        action="store_true",
        help="Use PREFECT_API_URL/PREFECT_API_KEY from the environment if set. Default is local/ephemeral execution.",
    )
    p.add_argument("--max-modulus", type=int, default=None, help="Enumerate modular sets up to this modulus.")
    p.add_argument("--cache", default=None, help="JSON-lines cache path (default: STANLEY_CACHE).")
    p.add_argument(
        "--prove",
        action="store_true",
        help="Also run the character prover over the forbidden characters.",
    )
    p.add_argument("--trace-dir", default=None, help="Write proof traces here.")
    return p.parse_args()


def _maybe_set_ephemeral_prefect_env(use_prefect_api: bool) -> None:
    if use_prefect_api:
        return
    # Ensure local execution doesn't depend on Prefect server/cloud.
    os.environ.pop("PREFECT_API_URL", None)
    os.environ.pop("PREFECT_API_KEY", None)
    os.environ.setdefault("PREFECT_SERVER_ALLOW_EPHEMERAL_MODE", "true")


def main() -> int:
    args = _parse_args()

    # Ensure `import src...` works when running from the repo root.
    repo_root = Path(__file__).resolve().parents[1]
    if str(repo_root) not in sys.path:
        sys.path.insert(0, str(repo_root))

    _maybe_set_ephemeral_prefect_env(args.use_prefect_api)

    from src.pipelines.flows.character_sweep import character_table_sweep_flow
    from src.pipelines.flows.forbidden_characters import forbidden_characters_flow

    sweep = character_table_sweep_flow(max_modulus=args.max_modulus, cache_path=args.cache)
    print(f"Done: missing characters {sweep['missing']}")
    print(f"Forbidden characters seen at an even modulus: {sweep['forbidden_found']}")
    if args.prove:
        results = forbidden_characters_flow(
            trace_dir=args.trace_dir, small_modulus_max=args.max_modulus, cache_path=args.cache
        )
        for r in results:
            print(f"lambda={r['lambda']}: {r['verdict']} (trace valid: {r['trace_valid']})")
            if r.get("uncovered_moduli"):
                print(f"  even moduli not enumerated: {r['uncovered_moduli']}")
        if any(r["verdict"] != "impossible" or not r["trace_valid"] for r in results):
            return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
