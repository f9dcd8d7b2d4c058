#!/usr/bin/env python3
"""End-to-end checks of the CLI: exit codes, file outputs, determinism."""

import json
import subprocess
import sys
import tempfile
from pathlib import Path

CLI = Path(sys.argv[1])
REPO = Path(sys.argv[2])
DATA = REPO / "data"

passed = 0


def run(*args, cwd=None):
    return subprocess.run([str(CLI), *args], capture_output=True, text=True, cwd=cwd)


def check(name, condition, context=""):
    global passed
    if not condition:
        print(f"FAIL {name}: {context}")
        sys.exit(1)
    passed += 1
    print(f"ok {name}")


def main():
    tmp = Path(tempfile.mkdtemp(prefix="procqm_cli_"))

    # simulate: exact trivial chain, CSV + JSON written.
    out = tmp / "sim"
    r = run("simulate", "--model", "dd", "--prep", "z+", "--chain", "z",
            "--trials", "300", "--seed", "7", "--resolution", "20", "--out", str(out))
    check("simulate exit 0", r.returncode == 0, r.stderr)
    csv = (tmp / "sim.csv").read_text().splitlines()
    check("simulate csv header",
          csv[0] == "prep,chain,outcome_seq,count,emp_freq,theory,se,quant_bound,verdict")
    check("simulate exact count", csv[1].startswith("z+,z,+,300,"), csv[1])
    report = json.loads((tmp / "sim.json").read_text())
    check("simulate json rows", len(report["rows"]) == 2)

    # simulate: unknown axis is a config error (exit 2).
    r = run("simulate", "--model", "dd", "--prep", "z+", "--chain", "sideways")
    check("unknown axis exit 2", r.returncode == 2, f"rc={r.returncode}")
    r = run("simulate", "--grid", "z,z", "--prep", "z+", "--chain", "z")
    check("duplicate grid axis exit 2", r.returncode == 2, f"rc={r.returncode}")

    # dp-table: the extended table.
    r = run("dp-table", "--out", str(tmp / "table"))
    check("dp-table exit 0", r.returncode == 0, r.stderr)
    table = (tmp / "table.csv").read_text()
    check("dp-table header", table.startswith("prep,i(z),ii(y),iii(x)"), table.splitlines()[0])
    check("dp-table deterministic cell", "z+,m1:1;m2:0" in table)
    check("dp-table split cell", "k1:1/2;k2:1/2" in table)

    # pd-validate: clean instance 0, broken instances 1 with the right rule.
    r = run("pd-validate", str(DATA / "pd_minimal.json"))
    check("pd-validate clean exit 0", r.returncode == 0, r.stdout + r.stderr)
    check("pd-validate clean output", "0 violation(s)" in r.stdout, r.stdout)

    r = run("pd-validate", str(DATA / "pd_broken_rule_a.json"))
    check("pd-validate broken-a exit 1", r.returncode == 1, f"rc={r.returncode}")
    check("pd-validate broken-a names rule", "violation a" in r.stdout, r.stdout)

    r = run("pd-validate", str(DATA / "pd_broken_rule_b.json"))
    check("pd-validate broken-b exit 1", r.returncode == 1, f"rc={r.returncode}")
    check("pd-validate broken-b names clause", "violation b.ii" in r.stdout, r.stdout)

    r = run("pd-validate", str(tmp / "missing.json"))
    check("pd-validate missing file exit 2", r.returncode == 2, f"rc={r.returncode}")

    # trace: a path over a 2-axis grid at resolution 10 has 20 visits.
    r = run("trace", "--prep", "z+", "--seed", "5", "--resolution", "10", "--grid", "z,x")
    check("trace exit 0", r.returncode == 0, r.stderr)
    path = json.loads(r.stdout)
    check("trace length", len(path) == 20, str(len(path)))
    check("trace excludes the orthogonal state",
          not any(v["direction_id"] == 0 and v["sign"] == -1 for v in path))

    # ppp-classify on the demo preps.
    r = run("ppp-classify", str(DATA / "ppp_preps_demo.json"), "--out", str(tmp / "cls"))
    check("ppp-classify exit 0", r.returncode == 0, r.stderr)
    cls = json.loads((tmp / "cls.json").read_text())
    check("ppp-classify two classes", len(cls["classes"]) == 2, str(len(cls["classes"])))
    check("ppp-classify verdicts",
          all(v["determines_state"] for v in cls["path_verdicts"]))
    matched = {tuple(sorted(c["matched_state"].items())) for c in cls["classes"]}
    check("ppp-classify tagged states", len(matched) == 2)

    # simulate --model ppp goes through the same path.
    r = run("simulate", "--model", "ppp", "--preps", str(DATA / "ppp_preps_demo.json"))
    check("simulate ppp exit 0", r.returncode == 0, r.stderr)
    check("simulate ppp output parses", "classes" in json.loads(r.stdout))

    # standard-check enumerates the delta/quantum model.
    r = run("simulate", "--model", "standard-check", "--grid", "z,x,y")
    check("standard-check exit 0", r.returncode == 0, r.stderr)

    # verify at reduced scale: deterministic bytes across runs and workers.
    args = ["verify", "--seed", "42", "--trials", "800", "--resolution", "10"]
    r1 = run(*args, "--workers", "1", "--out", str(tmp / "v1"))
    r2 = run(*args, "--workers", "1", "--out", str(tmp / "v2"))
    r3 = run(*args, "--workers", "8", "--out", str(tmp / "v3"))
    check("verify criterion lines", sum(1 for line in r1.stdout.splitlines()
                                        if line.startswith(("[PASS]", "[FAIL]"))) == 9, r1.stdout)
    check("verify repeat bytes", (tmp / "v1.csv").read_bytes() == (tmp / "v2.csv").read_bytes())
    check("verify worker bytes", (tmp / "v1.csv").read_bytes() == (tmp / "v3.csv").read_bytes())
    check("verify json bytes", (tmp / "v1.json").read_bytes() == (tmp / "v3.json").read_bytes())

    # config file defaults feed the same flags.
    cfg = tmp / "run.json"
    cfg.write_text(json.dumps({"prep": "z+", "chain": ["z"], "trials": 150,
                               "resolution": 20, "seed": 3, "out": str(tmp / "cfg_run")}))
    r = run("simulate", "--config", str(cfg))
    check("config file exit 0", r.returncode == 0, r.stderr)
    check("config file output", (tmp / "cfg_run.csv").exists())
    lines = (tmp / "cfg_run.csv").read_text().splitlines()
    check("config file exact count", lines[1].startswith("z+,z,+,150,"), lines[1])

    print(f"\nall {passed} CLI checks passed")


if __name__ == "__main__":
    main()
