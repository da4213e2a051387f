"""Run pvim subcommands and validate every JSON document against schemas/."""
import json
import pathlib
import subprocess
import sys
import tempfile

import jsonschema

binary, schema_dir = pathlib.Path(sys.argv[1]).resolve(), pathlib.Path(sys.argv[2])
schemas = {p.name.split(".")[0]: json.loads(p.read_text()) for p in schema_dir.glob("*.schema.json")}
failures = 0


def check(doc, where):
    global failures
    kind = doc["schema"].split("/")[0].removeprefix("pvim.")
    try:
        jsonschema.validate(doc, schemas[kind])
        print(f"ok   {kind:<10} {where}")
    except (jsonschema.ValidationError, KeyError) as e:
        failures += 1
        print(f"FAIL {kind:<10} {where}: {str(e).splitlines()[0]}")


def run(args, expect):
    proc = subprocess.run([str(binary), *args], capture_output=True, text=True, cwd=work)
    if proc.returncode != expect:
        global failures
        failures += 1
        print(f"FAIL exit {proc.returncode} != {expect}: {' '.join(args)}")
        return
    check(json.loads(proc.stdout), " ".join(args))


with tempfile.TemporaryDirectory() as tmp:
    work = pathlib.Path(tmp)
    (work / "data.csv").write_text("x\n1.2\n0.7\n2.5\n1.9\n")
    out = ["--out-dir", "out"]
    run(out + ["pval", "--model", "normal-variance", "--n", "20", "--s2", "0.79", "--sigma0-sq", "1"], 0)
    run(["pval", "--model", "binomial", "--n", "5", "--x", "3", "--theta0", "0.5", "--monte-carlo", "--samples", "1000"], 0)
    run(out + ["curve", "--model", "normal-variance", "--n", "20", "--s2", "0.79", "--from", "0.3", "--to", "3", "--svg"], 0)
    run(out + ["region", "--model", "normal-mean", "--xbar", "0.4", "--alpha", "0.1", "--prs", "symmetric"], 0)
    run(out + ["validate", "--model", "binomial", "--n", "10", "--null", "theta<=0.4", "--reps", "500",
               "--uniformity", "--coverage", "--coverage-reps", "50"], 0)
    run(out + ["ingest", "data.csv"], 0)
    run(out + ["coherence", "--step", "0.1"], 0)
    run(["pval", "--model", "normal-mean-constrained", "--x", "-1", "--null", "theta==0"], 3)
    run(["region", "--model", "normal-mean", "--xbar", "0", "--alpha", "2"], 2)
    run(["validate", "--model", "normal-mean", "--null", "theta==0", "--reps", "2000", "--negative-control"], 4)
    for manifest in sorted((work / "out").glob("*.manifest.json")):
        check(json.loads(manifest.read_text()), manifest.name)
        run(["rerun", str(manifest), "--verify"], 0)
    for result in sorted((work / "out").glob("*.json")):
        if not result.name.endswith(".manifest.json"):
            check(json.loads(result.read_text()), result.name)

print(f"{failures} schema failures")
sys.exit(1 if failures else 0)
