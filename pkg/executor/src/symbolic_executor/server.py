"""Wire-protocol server: one JSON request per stdin line, one JSON response
per stdout line.

    request:  {"id": <int>, "tool": "<name>", "args": {...}}
    response: {"id": <int>, "ok": <bool>, "payload": "<string>", "message": "<string>"}

``__ping__`` answers with payload ``pong``; EOF exits cleanly. A response
with ok=false only signals a transport-level problem (malformed request);
tool-level failures travel inside the payload as error envelopes.
"""

from __future__ import annotations

import json
import logging
import sys

from .toolkit import SymPyToolkit, dispatch


def _respond(stream, req_id: int, ok: bool, payload: str = "", message: str = "") -> None:
    line = json.dumps(
        {"id": req_id, "ok": ok, "payload": payload, "message": message},
        ensure_ascii=False,
    )
    stream.write(line + "\n")
    stream.flush()


def serve(stdin=None, stdout=None) -> int:
    stdin = stdin if stdin is not None else sys.stdin
    stdout = stdout if stdout is not None else sys.stdout
    toolkit = SymPyToolkit()
    for line in stdin:
        line = line.strip()
        if not line:
            continue
        req_id = -1
        try:
            request = json.loads(line)
            req_id = int(request["id"])
            tool = str(request["tool"])
            args = request.get("args", {})
        except (ValueError, TypeError, KeyError):
            try:
                maybe = json.loads(line)
                if isinstance(maybe, dict) and isinstance(maybe.get("id"), int):
                    req_id = maybe["id"]
            except ValueError:
                pass
            _respond(stdout, req_id, False, message="bad request")
            continue
        if tool == "__ping__":
            _respond(stdout, req_id, True, payload="pong")
            continue
        payload = dispatch(toolkit, tool, args)
        _respond(stdout, req_id, True, payload=payload)
    return 0


def main() -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.WARNING,
                        format="%(name)s %(levelname)s %(message)s")
    return serve()


if __name__ == "__main__":
    sys.exit(main())
