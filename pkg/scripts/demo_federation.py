#!/usr/bin/env python3
"""Spin up a 3-VO deployment on localhost and leave it running.

Generates a corpus, partitions it across six workers (two per VO),
starts three brokers with each other as peers, prints the endpoints,
and waits for Ctrl-C. Point the CLI or the web UI at any gateway:

    python3 scripts/demo_federation.py --records 30000
    fedsearch search --broker 127.0.0.1:<wire port> --keyword "baba"
"""
import argparse
import signal
import sys
import tempfile
from pathlib import Path

from fedsearch.corpus import generate_corpus, load_manifest, partition_dataset
from fedsearch.deploy import DeploymentSpec, LocalDeployment, round_robin_workers


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--records", type=int, default=30_000)
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--workdir", type=Path, default=None)
    args = parser.parse_args()

    workdir = args.workdir or Path(tempfile.mkdtemp(prefix="fedsearch-demo-"))
    corpus_dir = workdir / "corpus"
    print(f"workdir: {workdir}")
    manifest = generate_corpus(args.records, args.seed, corpus_dir)
    partition_dataset(manifest, 6)
    manifest = load_manifest(corpus_dir / "manifest.json")

    vo_ids = ["vo1", "vo2", "vo3"]
    workers = round_robin_workers([p.partition_id for p in manifest.partitions], vo_ids)
    spec = DeploymentSpec(
        manifest=manifest.path, vo_ids=vo_ids, workers=workers, startup_timeout_s=120.0
    )
    deployment = LocalDeployment(spec, workdir / "run")
    deployment.start()
    print("\ndeployment ready:")
    for vo in vo_ids:
        print(f"  {vo}: wire {deployment.broker_endpoint(vo)}   gateway {deployment.gateway_url(vo)}")
    print("\nCtrl-C to tear down")
    try:
        signal.pause()
    except KeyboardInterrupt:
        pass
    finally:
        deployment.stop()
    return 0


if __name__ == "__main__":
    sys.exit(main())
