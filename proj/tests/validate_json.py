"""Runs every JSON-emitting CLI path and validates the output against the shipped schemas."""

import argparse
import json
import pathlib
import subprocess
import sys

from jsonschema import Draft202012Validator
from referencing import Registry, Resource


def load_registry(schema_dir):
    resources = []
    for path in sorted(schema_dir.glob("*.schema.json")):
        resources.append((path.name, Resource.from_contents(json.loads(path.read_text()))))
    return Registry().with_resources(resources)


def validate(registry, schema_dir, schema_name, document, label):
    schema = json.loads((schema_dir / schema_name).read_text())
    validator = Draft202012Validator(schema, registry=registry)
    errors = sorted(validator.iter_errors(document), key=lambda e: list(e.path))
    for error in errors:
        print(f"{label}: {'/'.join(map(str, error.path))}: {error.message}")
    print(f"{'ok  ' if not errors else 'FAIL'} {label} against {schema_name}")
    return not errors


def run(cli, args, expect=0):
    result = subprocess.run([cli, *args], capture_output=True, text=True)
    if result.returncode != expect:
        sys.exit(f"{' '.join(args)} exited {result.returncode}, expected {expect}\n{result.stderr}")
    return result


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--cli", required=True)
    parser.add_argument("--schemas", required=True, type=pathlib.Path)
    parser.add_argument("--work", required=True, type=pathlib.Path)
    args = parser.parse_args()
    work = args.work
    work.mkdir(parents=True, exist_ok=True)
    registry = load_registry(args.schemas)
    for path in args.schemas.glob("*.schema.json"):
        Draft202012Validator.check_schema(json.loads(path.read_text()))

    paths = work / "paths.csv"
    run(args.cli, ["simulate", "--n", "40", "--grid-size", "25", "--seed", "3", "--out", str(paths)])

    cases = []
    run(args.cli, ["quantile", "--in", str(paths), "--fan-k", "1,2", "--fan-c", "0.5", "--u-spec", "1:0.2+3:0.1",
                   "--out", str(work / "q.csv")])
    cases.append(("quantile_diagnostics.schema.json", work / "q.csv.json"))
    run(args.cli, ["efficiency", "--process", "gauss-kernel", "--df", "9", "--grid-size", "20", "--mc", "2048",
                   "--seed", "5", "--out", str(work / "eff.json")])
    cases.append(("efficiency_report.schema.json", work / "eff.json"))
    run(args.cli, ["efficiency", "--table", "--grid-size", "12", "--mc", "512", "--seed", "5",
                   "--out", str(work / "table.json")])
    cases.append(("efficiency_table.schema.json", work / "table.json"))
    for study in ("gc", "integrated"):
        out = work / f"{study}.json"
        run(args.cli, ["converge", "--study", study, "--grid-size", "15", "--n-list", "40,80", "--reps", "3",
                       "--n-ref", "2000", "--draws", "10", "--probes", "4", "--seed", "9", "--out", str(out)])
        cases.append(("rate_report.schema.json", out))
    run(args.cli, ["converge", "--study", "bahadur", "--grid-size", "15", "--n-list", "40,80", "--reps", "3",
                   "--n-ref", "2000", "--d", "2", "--seed", "9", "--out", str(work / "bahadur.json")])
    cases.append(("bahadur_study.schema.json", work / "bahadur.json"))

    ok = True
    for schema, path in cases:
        ok &= validate(registry, args.schemas, schema, json.loads(path.read_text()), path.name)

    failure = run(args.cli, ["quantile", "--in", str(paths), "--u-spec", "1:1.5"], expect=1)
    error = json.loads(failure.stderr[failure.stderr.index("{"):])
    ok &= validate(registry, args.schemas, "error.schema.json", error, "runtime error")
    sys.exit(0 if ok else 1)


if __name__ == "__main__":
    main()
