"""Regenerate src/pilot/fixtures from the golden cases.

Each golden case is written as a text file; the manifest records the CLI
command, the expected exit code and the sha256 of the expected stdout.
Run from the repository root: ``python tools/make_fixtures.py``.
"""
import contextlib
import io
import json
import os
import sys

from pilot import cli
from pilot.corpus import FIXTURES, golden_cases, output_hash

EXT = {"process": ".pi", "network": ".net", "choreography": ".chor", "formula": ".pil"}
COMMANDS = {
    "DeadlockFree": ["check"], "Deadlocked": ["check"], "RaceFound": ["check"],
    "Progress": ["progress"], "PrivateMobility": ["progress"], "Unprovable": ["prove"],
    "Projects": ["project"], "Unprojectable": ["project"], "Extracts": ["extract"],
}
EXTRA = [("nil", ["encode"]), ("eq1", ["encode"]), ("eq11-network", ["extract"]),
         ("remark-deadlock", ["races"]), ("race-receive", ["races"]),
         ("eq13", ["run"]), ("eq-choreo", ["run"]), ("eq1", ["check", "--format", "json"])]


def run(argv):
    buf = io.StringIO()
    with contextlib.redirect_stdout(buf):
        code = cli.main(argv)
    return code, buf.getvalue()


def main():
    FIXTURES.mkdir(exist_ok=True)
    os.chdir(FIXTURES)
    files = {}
    for c in golden_cases():
        files[c.name] = c.name + EXT[c.kind]
        with open(files[c.name], "w") as f:
            f.write(c.text + "\n")
    jobs = [(c.name, COMMANDS[c.expect]) for c in golden_cases()] + EXTRA
    manifest = []
    for name, cmd in jobs:
        argv = [cmd[0], files[name]] + cmd[1:]
        code, out = run(argv)
        manifest.append({"name": name, "command": argv, "exit": code, "sha256": output_hash(out)})
        print(code, " ".join(argv), file=sys.stderr)
    with open("manifest.json", "w") as f:
        json.dump(manifest, f, indent=2)
        f.write("\n")


if __name__ == "__main__":
    main()
