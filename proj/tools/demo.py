#!/usr/bin/env python3
# Copyright 2026 The Energy Arena Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Plays a few battles against a local `gea serve` using the seed questions.

Usage: tools/demo.py [--gea build/tools/gea] [--config config/mock.json]
                     [--battles 10] [--lang en|es] [--seed 1]
"""

import argparse
import json
import pathlib
import random
import subprocess
import sys
import tempfile
import time
import urllib.error
import urllib.request

ROOT = pathlib.Path(__file__).resolve().parent.parent


def call(base, method, path, body=None):
    data = None if body is None else json.dumps(body).encode()
    req = urllib.request.Request(base + path, data=data, method=method,
                                 headers={"Content-Type": "application/json"})
    try:
        with urllib.request.urlopen(req, timeout=30) as res:
            return res.status, json.loads(res.read())
    except urllib.error.HTTPError as e:
        return e.code, json.loads(e.read() or b"{}")


def wait_ready(base, proc):
    for _ in range(100):
        if proc.poll() is not None:
            sys.exit("server exited with code %d" % proc.returncode)
        try:
            if call(base, "GET", "/api/v1/healthz")[0] == 200:
                return
        except OSError:
            pass
        time.sleep(0.05)
    sys.exit("server did not come up")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--gea", default=str(ROOT / "build" / "tools" / "gea"))
    ap.add_argument("--config", default=str(ROOT / "config" / "mock.json"))
    ap.add_argument("--battles", type=int, default=10)
    ap.add_argument("--lang", default="en", choices=["en", "es"])
    ap.add_argument("--port", type=int, default=18080)
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args()

    questions = json.loads((ROOT / "assets" / "seed_questions.json").read_text())["questions"]
    rng = random.Random(args.seed)
    log = pathlib.Path(tempfile.mkdtemp()) / "demo.jsonl"
    base = "http://127.0.0.1:%d" % args.port
    proc = subprocess.Popen([args.gea, "serve", "--config", args.config,
                             "--listen", "127.0.0.1:%d" % args.port, "--log", str(log)])
    try:
        wait_ready(base, proc)
        for i in range(args.battles):
            _, created = call(base, "POST", "/api/v1/battles", {"language": args.lang})
            bid = created["session_id"]
            question = questions[i % len(questions)][args.lang]
            status, view = call(base, "POST", "/api/v1/battles/%s/prompt" % bid,
                                {"question": question})
            if status != 200:
                print("battle %d: %s" % (i, view["error"]["message"]))
                continue
            choice = rng.choice(["A", "B", "tie"])
            _, view = call(base, "POST", "/api/v1/battles/%s/vote" % bid, {"choice": choice})
            if "energy_prompt" in view:
                print("  %s" % view["energy_prompt"]["message"])
                decision = rng.choice(["keep", "switch"])
                _, view = call(base, "POST", "/api/v1/battles/%s/energy-vote" % bid,
                               {"decision": decision})
            reveal = view["reveal"]
            print("battle %d [%s]: initial %s, final %s, higher energy at %s" % (
                i, reveal["family_id"], reveal["initial_choice"], reveal["final_choice"],
                reveal["higher_energy_position"]))
        _, results = call(base, "GET", "/api/v1/results")
        print(json.dumps(results["rows"]["aggregate"], indent=2))
    finally:
        proc.terminate()
        proc.wait()
    subprocess.run([args.gea, "analyze", "--log", str(log)], check=True)


if __name__ == "__main__":
    main()
