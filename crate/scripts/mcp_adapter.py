#!/usr/bin/env python3
"""Best-effort converter from Match Charting Project point files to the
normalized points CSV consumed by `servelab ingest`.

Input: a MCP-style points CSV (e.g. charting-m-points*.csv) with at least
the columns `match_id`, `Svr`, `PtWinner` and `rallyCount`, plus either the
`1st`/`2nd` shot-string columns or an `isDouble` flag. Column lookup is
case-insensitive.

Output columns: match_id,server_id,serve_number,serve_in,rally_length,server_won

Interpretation, with its assumptions spelled out:
  * Each row is one completed point. The charting notation has no encoding
    for lets or replayed points, so nothing is excluded on that account.
  * A non-empty `2nd` column (or a double-fault flag) means the point was
    decided on the second serve; otherwise on the first.
  * A double fault is emitted as serve_number=Second, serve_in=false.
  * `rallyCount` is the number of shots landed in court (1 = ace or
    unreturned serve); the server wins exactly the odd-length rallies.
    Rows whose winner contradicts that parity (charting noise, hindrance
    calls, retirements mid-point) are dropped and counted.
  * Server identity comes from the `Svr` index (1 or 2) applied to the two
    player name segments of the MCP match id
    (YYYYMMDD-G-Tournament-Round-Player1-Player2).

Anything that cannot be interpreted is skipped, and a summary of skip
reasons is printed to stderr.
"""

import argparse
import csv
import sys
from collections import Counter


def truthy(value: str) -> bool:
    return str(value).strip().lower() in {"1", "true", "t", "yes", "y"}


def player_names(match_id: str):
    parts = match_id.split("-")
    if len(parts) < 6:
        return None
    return parts[-2].strip(), parts[-1].strip()


def convert(reader: csv.DictReader, writer: csv.writer, skips: Counter) -> int:
    fields = {name.lower(): name for name in reader.fieldnames or []}

    def col(row, *names, default=""):
        for name in names:
            key = fields.get(name.lower())
            if key is not None and row.get(key) not in (None, ""):
                return row[key]
        return default

    required = ["match_id", "svr", "ptwinner", "rallycount"]
    missing = [name for name in required if name not in fields]
    if missing:
        raise SystemExit(f"input lacks required columns: {', '.join(missing)}")

    written = 0
    for row in reader:
        match_id = col(row, "match_id")
        names = player_names(match_id)
        if names is None:
            skips["unparseable match_id"] += 1
            continue
        try:
            server_index = int(col(row, "Svr"))
            winner_index = int(col(row, "PtWinner"))
        except ValueError:
            skips["bad Svr/PtWinner"] += 1
            continue
        if server_index not in (1, 2) or winner_index not in (1, 2):
            skips["bad Svr/PtWinner"] += 1
            continue
        server_id = names[server_index - 1]
        server_won = winner_index == server_index

        double = truthy(col(row, "isDouble"))
        second = double or col(row, "2nd").strip() != ""

        if double:
            if server_won:
                skips["double fault won by server"] += 1
                continue
            writer.writerow([match_id, server_id, "Second", "false", 0, "false"])
            written += 1
            continue

        raw_count = col(row, "rallyCount", default="").strip()
        try:
            rally_length = int(float(raw_count))
        except ValueError:
            skips["bad rallyCount"] += 1
            continue
        if rally_length < 1:
            skips["non-positive rally on an in-serve"] += 1
            continue
        if server_won != (rally_length % 2 == 1):
            skips["winner/parity mismatch"] += 1
            continue

        serve_number = "Second" if second else "First"
        writer.writerow([
            match_id,
            server_id,
            serve_number,
            "true",
            rally_length,
            "true" if server_won else "false",
        ])
        written += 1
    return written


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("input", help="MCP points CSV")
    parser.add_argument("output", help="normalized points CSV to write")
    args = parser.parse_args()

    skips: Counter = Counter()
    with open(args.input, newline="", encoding="utf-8", errors="replace") as fin, open(
        args.output, "w", newline="", encoding="utf-8"
    ) as fout:
        writer = csv.writer(fout)
        writer.writerow(
            ["match_id", "server_id", "serve_number", "serve_in", "rally_length", "server_won"]
        )
        written = convert(csv.DictReader(fin), writer, skips)

    print(f"{written} points written", file=sys.stderr)
    for reason, count in skips.most_common():
        print(f"  skipped {count}: {reason}", file=sys.stderr)


if __name__ == "__main__":
    main()
