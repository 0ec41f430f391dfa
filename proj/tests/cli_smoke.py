#!/usr/bin/env python3
"""Drives the command line tool end to end against a tiny generated dataset.

Checks every subcommand, the resume path, and the documented exit codes.
"""

import argparse
import json
import pathlib
import shutil
import struct
import subprocess
import sys
import zlib


def png_bytes(rows):
    """Minimal 8-bit grayscale PNG encoder (filter 0 on every row)."""

    def chunk(tag, data):
        body = tag + data
        return struct.pack(">I", len(data)) + body + struct.pack(">I", zlib.crc32(body) & 0xFFFFFFFF)

    height = len(rows)
    width = len(rows[0])
    header = struct.pack(">IIBBBBB", width, height, 8, 0, 0, 0, 0)
    raw = b"".join(b"\x00" + bytes(row) for row in rows)
    return (b"\x89PNG\r\n\x1a\n" + chunk(b"IHDR", header)
            + chunk(b"IDAT", zlib.compress(raw)) + chunk(b"IEND", b""))


def run(binary, args, cwd):
    return subprocess.run([str(binary)] + args, cwd=cwd, capture_output=True, text=True)


def expect(condition, message, proc=None):
    if condition:
        return
    if proc is not None:
        sys.stderr.write(proc.stdout)
        sys.stderr.write(proc.stderr)
    sys.exit("cli smoke: " + message)


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--binary", required=True)
    parser.add_argument("--workdir", required=True)
    args = parser.parse_args()

    work = pathlib.Path(args.workdir)
    if work.exists():
        shutil.rmtree(work)
    data = work / "data"
    data.mkdir(parents=True)
    for i in range(6):
        base = 150 + 9 * i
        rows = [[base + (y * 8 + x) % 40 for x in range(8)] for y in range(8)]
        (data / f"img{i}.png").write_bytes(png_bytes(rows))
    (work / "labels.csv").write_text(
        "image_id,class_index\n" + "".join(f"img{i},1\n" for i in range(6)))

    config = {
        "models": [
            {"kind": "pixel_key", "model_id": "alpha", "architecture_tag": "mlp",
             "input_height": 8, "input_width": 8, "key_pixels": [[2, 3]]},
            {"kind": "pixel_key", "model_id": "beta", "architecture_tag": "mlp",
             "input_height": 8, "input_width": 8, "key_pixels": [[5, 5], [1, 6]]},
        ],
        "dataset": "data",
        "output_dir": "out",
        "labels": "labels.csv",
        "search": {"iterations": 4, "mutant_budget": 600, "seed": 5},
    }
    (work / "run.json").write_text(json.dumps(config))

    binary = pathlib.Path(args.binary).resolve()

    proc = run(binary, ["extract", "--config", "run.json", "--workers", "2"], work)
    expect(proc.returncode == 0, f"extract exited {proc.returncode}", proc)
    expect("extracted 12 record(s), resumed 0" in proc.stdout, "unexpected extract summary", proc)

    proc = run(binary, ["extract", "--config", "run.json"], work)
    expect(proc.returncode == 0, f"second extract exited {proc.returncode}", proc)
    expect("extracted 0 record(s), resumed 12" in proc.stdout, "resume did not skip", proc)

    proc = run(binary, ["report", "--records", "out", "--format", "csv"], work)
    expect(proc.returncode == 0, f"report csv exited {proc.returncode}", proc)
    expect(proc.stdout.startswith("model_id,area,correct,incorrect,mean,accuracy"),
           "csv header missing", proc)
    expect("alpha" in proc.stdout and "beta" in proc.stdout, "csv rows missing", proc)

    proc = run(binary, ["report", "--records", "out", "--format", "md"], work)
    expect(proc.returncode == 0, f"report md exited {proc.returncode}", proc)
    expect("| Model | Area |" in proc.stdout, "markdown table missing", proc)

    proc = run(binary, ["compare", "--records", "out", "--out", "rep",
                        "--labels", "labels.csv", "--significance", "0.05"], work)
    expect(proc.returncode == 0, f"compare exited {proc.returncode}", proc)
    for name in ["report.md", "summary.csv", "dice.csv", "hausdorff.csv",
                 "stats.json", "violins.svg"]:
        expect((work / "rep" / name).is_file(), f"compare did not write {name}", proc)

    proc = run(binary, ["stats", "--records", "out", "--labels", "labels.csv"], work)
    expect(proc.returncode == 0, f"stats exited {proc.returncode}", proc)
    doc = json.loads(proc.stdout)
    expect("tests" in doc and "significance" in doc, "stats JSON incomplete", proc)

    proc = run(binary, ["plot", "--records", "out", "--out", "violins.svg"], work)
    expect(proc.returncode == 0, f"plot exited {proc.returncode}", proc)
    expect("<svg" in (work / "violins.svg").read_text(), "plot output is not SVG", proc)

    proc = run(binary, ["check", "--records", "out"], work)
    expect(proc.returncode == 0, f"check exited {proc.returncode}", proc)
    expect("checked 12 record(s), aggregate consistent" in proc.stdout,
           "check summary missing", proc)

    aggregate = work / "out" / "records.csv"
    pristine = aggregate.read_text()
    aggregate.write_text(pristine.replace("alpha", "gamma", 1))
    proc = run(binary, ["check", "--records", "out"], work)
    expect(proc.returncode == 2, f"tampered aggregate exited {proc.returncode}", proc)
    aggregate.write_text(pristine)

    proc = run(binary, ["transmogrify"], work)
    expect(proc.returncode == 1, f"unknown subcommand exited {proc.returncode}", proc)

    proc = run(binary, [], work)
    expect(proc.returncode == 1, f"missing subcommand exited {proc.returncode}", proc)

    proc = run(binary, ["extract", "--config", "absent.json"], work)
    expect(proc.returncode == 2, f"missing config exited {proc.returncode}", proc)

    proc = run(binary, ["report", "--records", "nowhere", "--format", "csv"], work)
    expect(proc.returncode == 2, f"missing records exited {proc.returncode}", proc)

    print("cli smoke ok")


if __name__ == "__main__":
    main()
