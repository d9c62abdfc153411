#!/usr/bin/env python3
# SPDX-License-Identifier: Apache-2.0
"""Runs functions from tool definition files for the tulip runtime.

    tulip_runner.py <tdf_path> <function_name>   < {"arguments": {...}}
    tulip_runner.py --check <tdf_path>

Execution prints exactly one JSON line, {"result": ...} or {"error": "..."}.
Values that JSON cannot carry (complex numbers, NaN) are sent as str(value).
"""

import json
import math
import sys


def load(path):
    with open(path, encoding="utf-8") as f:
        source = f.read()
    namespace = {"__name__": "tulip_tool", "__file__": path}
    exec(compile(source, path, "exec"), namespace)
    return namespace


def encode(value):
    if value is None or isinstance(value, (bool, int, str)):
        return value
    if isinstance(value, float):
        return value if math.isfinite(value) else str(value)
    if isinstance(value, (list, tuple)):
        return [encode(v) for v in value]
    if isinstance(value, (set, frozenset)):
        return [encode(v) for v in sorted(value)]
    if isinstance(value, dict):
        return {str(k): encode(v) for k, v in value.items()}
    return str(value)


def check(path):
    try:
        with open(path, encoding="utf-8") as f:
            compile(f.read(), path, "exec")
    except SyntaxError as e:
        print(f"line {e.lineno}: {e.msg}")
        return 1
    try:
        load(path)
    except Exception as e:  # module-level code must run cleanly
        print(f"{type(e).__name__}: {e}")
        return 1
    return 0


def run(path, name):
    try:
        request = json.loads(sys.stdin.readline() or "{}")
        arguments = request.get("arguments", {})
        fn = load(path).get(name)
        if not callable(fn):
            print(json.dumps({"error": f"no function `{name}` in {path}"}))
            return 1
        result = fn(**arguments)
    except Exception as e:
        print(json.dumps({"error": f"{type(e).__name__}: {e}"}))
        return 1
    print(json.dumps({"result": encode(result)}))
    return 0


def main(argv):
    if len(argv) == 3 and argv[1] == "--check":
        return check(argv[2])
    if len(argv) == 3:
        return run(argv[1], argv[2])
    print(json.dumps({"error": "usage: tulip_runner.py <tdf_path> <function_name> | --check <tdf_path>"}))
    return 2


if __name__ == "__main__":
    sys.exit(main(sys.argv))
