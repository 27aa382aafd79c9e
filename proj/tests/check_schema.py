"""Runs every CLI command on small synthetic data and validates the output documents."""

import json
import shutil
import subprocess
import sys
from pathlib import Path

import jsonschema

QUICK = ["--epochs", "2", "--seeds", "2", "--batch-size", "32"]


def main() -> int:
    cli, schema_path, tmp = sys.argv[1], Path(sys.argv[2]), Path(sys.argv[3])
    shutil.rmtree(tmp, ignore_errors=True)
    tmp.mkdir(parents=True)
    schema = json.loads(schema_path.read_text())
    jsonschema.Draft202012Validator.check_schema(schema)
    validator = jsonschema.Draft202012Validator(schema)

    def call(*args, expect=0):
        proc = subprocess.run([cli, *args], capture_output=True, text=True)
        if proc.returncode != expect:
            sys.stderr.write(proc.stderr)
            raise SystemExit(f"{' '.join(args)}: exit {proc.returncode}, expected {expect}")
        return proc.stdout

    rel = tmp / "relation"
    call("synth", "--task", "relation", "-o", str(rel), "--n-examples", "120",
         "--n-words", "6", "--dim", "4", "--n-layers", "2")
    bad = tmp / "broken"
    shutil.copytree(rel, bad)
    (bad / "labels.json").write_text("{\"labels\": [\"only\"]}\n")

    cases = {
        "run": call("run", "--dataset", str(rel), "--control", "gcn", "--baseline", *QUICK),
        "run-kan": call("run", "--dataset", str(rel), "--control", "kan", "--layer-index", "0", *QUICK),
        "sweep-layers": call("sweep-layers", "--dataset", str(rel), "--control", "message", *QUICK),
        "ablate-random-graph": call("ablate-random-graph", "--dataset", str(rel), "--control", "gcn", *QUICK),
        "bucket-eval": call("bucket-eval", "--dataset", str(rel), "--bounds", "1,3", *QUICK),
        "gradcheck": call("gradcheck", "--instances", "2"),
        "validate": call("validate", "--dataset", str(rel)),
        "validate-broken": call("validate", "--dataset", str(bad), expect=3),
    }
    failed = 0
    for name, text in cases.items():
        errors = sorted(validator.iter_errors(json.loads(text)), key=lambda e: list(e.path))
        for e in errors:
            print(f"{name}: {'/'.join(map(str, e.path))}: {e.message}")
        print(f"{name}: {'ok' if not errors else 'INVALID'}")
        failed += bool(errors)
    broken = json.loads(cases["run"])
    broken["result"]["mean_f1"] = 1.5
    del broken["config"]["lr"]
    if validator.is_valid(broken):
        print("schema accepted a corrupted run document")
        failed += 1
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
