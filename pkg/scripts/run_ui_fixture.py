#!/usr/bin/env python3
"""Small live deployment for frontend end-to-end tests.

Starts 1 VO with 2 workers over a tiny corpus (optionally leaving one
partition without a replica), prints one JSON line with gateway URLs and
worker PIDs, then blocks until stdin closes. The caller kills workers by
PID to drive fault scenarios.
"""
import argparse
import json
import sys
import tempfile
from pathlib import Path

from fedsearch.corpus import generate_corpus, load_manifest, partition_dataset
from fedsearch.deploy import DeploymentSpec, LocalDeployment, WorkerSpec


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--records", type=int, default=1000)
    parser.add_argument("--heartbeat", type=float, default=2.0)
    args = parser.parse_args()

    workdir = Path(tempfile.mkdtemp(prefix="fedsearch-ui-fixture-"))
    corpus_dir = workdir / "corpus"
    generate_corpus(args.records, 99, corpus_dir)
    manifest = load_manifest(corpus_dir / "manifest.json")
    partition_dataset(manifest, 2)
    manifest = load_manifest(corpus_dir / "manifest.json")

    workers = [
        WorkerSpec(node_id="w0", vo_id="vo1", partition_ids=["part-0000"], task_delay_ms=300),
        WorkerSpec(node_id="w1", vo_id="vo1", partition_ids=["part-0001"], task_delay_ms=300),
    ]
    spec = DeploymentSpec(
        manifest=manifest.path,
        vo_ids=["vo1"],
        workers=workers,
        heartbeat_interval_s=args.heartbeat,
        task_timeout_s=5.0,
        startup_timeout_s=60.0,
    )
    deployment = LocalDeployment(spec, workdir / "run")
    deployment.start()
    info = {
        "gateway": deployment.gateway_url("vo1"),
        "wire": deployment.broker_endpoint("vo1"),
        "workers": deployment.worker_pids(),
        "workdir": str(workdir),
    }
    print(json.dumps(info), flush=True)
    try:
        sys.stdin.read()  # parent closes stdin (or dies) to tear down
    except KeyboardInterrupt:
        pass
    finally:
        deployment.stop()
    return 0


if __name__ == "__main__":
    sys.exit(main())
