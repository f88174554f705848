"""End-to-end checks of the stdd-sim command line: exit codes, outputs, determinism."""

import json
import os
import shutil
import subprocess
import sys
import tempfile

SIM = sys.argv[1]
failures = []


def sim(*args):
    return subprocess.run([SIM, *map(str, args)], capture_output=True, text=True)


def check(name, cond, detail=""):
    print(("ok   " if cond else "FAIL ") + name + (f" ({detail})" if detail and not cond else ""))
    if not cond:
        failures.append(name)


def load(path):
    with open(path) as f:
        return json.load(f)


def strip(report):
    report = dict(report)
    report.pop("generated_at", None)
    return report


work = tempfile.mkdtemp(prefix="stdd-cli-")
try:
    corpus = os.path.join(work, "corpus")
    r = sim("gen-corpus", "--count", 3, "--seed", 7, "--out", corpus)
    check("gen-corpus exits 0", r.returncode == 0, r.stderr)
    files = sorted(os.listdir(corpus))
    check("gen-corpus writes 3 files", len(files) == 3, files)
    seeds = [json.loads(open(os.path.join(corpus, f)).readline())["seed"] for f in files]
    check("gen-corpus seeds 7,8,9", seeds == [7, 8, 9], seeds)
    before = [open(os.path.join(corpus, f), "rb").read() for f in files]
    sim("gen-corpus", "--count", 3, "--seed", 7, "--out", corpus)
    after = [open(os.path.join(corpus, f), "rb").read() for f in files]
    check("gen-corpus rerun is byte-identical", before == after)
    check("gen-corpus count 0 is a usage error", sim("gen-corpus", "--count", 0, "--out", corpus).returncode == 2)

    blocker = os.path.join(work, "blocker")
    open(blocker, "w").close()
    check("unwritable corpus dir is an I/O error",
          sim("gen-corpus", "--count", 1, "--out", os.path.join(blocker, "x")).returncode == 1)

    out = os.path.join(work, "run.json")
    r = sim("run", "--synthetic", os.path.join(corpus, files[0]), "--strategy", "stdd", "--out", out)
    check("run exits 0", r.returncode == 0, r.stderr)
    rep = load(out)
    check("run report schema marker", rep.get("schema") == "stdd-report/1")
    check("run report embeds its config", rep["config"]["strategy"]["name"] == "stdd")
    check("run report has per-token classes", all("class" in t for t in rep["tokens"]))

    # Closure: re-running from the embedded config reproduces the report.
    cfg_path = os.path.join(work, "embedded.jsonl")
    with open(cfg_path, "w") as f:
        f.write(json.dumps(rep["config"]) + "\n")
    os.rename(out, out + ".orig")
    sim("run", "--config", cfg_path)
    check("embedded config reproduces the report", strip(load(out)) == strip(rep))
    out2 = os.path.join(work, "run2.json")

    # Flags override config values.
    with open(cfg_path, "w") as f:
        f.write(json.dumps({"strategy": {"name": "fixed"}, "max_steps": 20}) + "\n")
    sim("run", "--config", cfg_path, "--strategy", "dus", "--out", out2)
    rep2 = load(out2)
    check("flags win over config", rep2["config"]["strategy"]["name"] == "dus" and rep2["config"]["max_steps"] == 20)

    check("unknown strategy is a usage error", sim("run", "--strategy", "greedy").returncode == 2)
    check("unknown flag is a usage error", sim("run", "--bogus").returncode == 2)
    check("no subcommand is a usage error", sim().returncode == 2)
    check("missing spec file is a validation error",
          sim("run", "--synthetic", os.path.join(work, "nope.json")).returncode == 3)
    check("bad boundary mode is a usage error", sim("run", "--boundary", "eq6").returncode == 2)

    cmp_path = os.path.join(work, "cmp.json")
    r = sim("compare", "--corpus", corpus, "--strategies", "fixed,fixed", "--out", cmp_path)
    check("compare exits 0", r.returncode == 0, r.stderr)
    cmp = load(cmp_path)
    check("self-comparison speedups are exactly 1",
          all(res["speedup"] == 1.0 for s in cmp["sequences"] for res in s["results"]))
    r = sim("compare", "--strategies", "fixed,dus", "--count", 10, "--out", cmp_path)
    cmp = load(cmp_path)
    check("dus(8) takes 8 steps on every sequence",
          all(s["results"][1]["steps_used"] == 8 for s in cmp["sequences"]))
    check("compare emits per-step decode series",
          all(len(s["results"][1]["decoded_per_step"]) == 8 for s in cmp["sequences"]))
    check("missing baseline is a usage error",
          sim("compare", "--strategies", "stdd,dus", "--count", 2).returncode == 2)
    check("run rejects a corpus", sim("run", "--corpus", corpus).returncode == 2)

    # Traces: record, validate, replay.
    trace = os.path.join(work, "t.jsonl")
    r = sim("run", "--seed", 4, "--strategy", "fixed", "--record-trace", trace, "--out", out)
    check("record-trace exits 0", r.returncode == 0, r.stderr)
    check("recorded trace validates", sim("validate-trace", trace).returncode == 0)
    r = sim("run", "--trace", trace, "--strategy", "fixed", "--out", out2)
    check("replaying the recording with the same strategy is faithful",
          r.returncode == 0 and load(out2)["metrics"]["fidelity"] == 1.0, r.stderr)

    lines = open(trace).read().splitlines()
    step8 = json.loads(lines[8]) if len(lines) > 8 else None
    if step8 is not None:
        step8["conf"][3] = 1.5
        bad = lines[:8] + [json.dumps(step8)] + lines[9:]
        bad_path = os.path.join(work, "bad.jsonl")
        with open(bad_path, "w") as f:
            f.write("\n".join(bad) + "\n")
        r = sim("validate-trace", bad_path)
        check("range error is reported with its line", r.returncode == 3 and "line 9" in r.stderr, r.stderr)
    gap = lines[:4] + lines[5:]
    gap_path = os.path.join(work, "gap.jsonl")
    with open(gap_path, "w") as f:
        f.write("\n".join(gap) + "\n")
    r = sim("validate-trace", gap_path)
    check("skipped step is a contiguity error", r.returncode == 3 and "t" in r.stderr, r.stderr)
    check("unreadable trace is an I/O error", sim("validate-trace", os.path.join(work, "none")).returncode == 1)

    short_path = os.path.join(work, "short.jsonl")
    with open(short_path, "w") as f:
        f.write("\n".join(lines[:3]) + "\n")
    r = sim("run", "--trace", short_path, "--strategy", "fixed", "--max-steps", 64, "--out", out2)
    check("replay underrun exits 4", r.returncode == 4, r.stderr)
finally:
    shutil.rmtree(work, ignore_errors=True)

print(f"{len(failures)} failed")
sys.exit(1 if failures else 0)
