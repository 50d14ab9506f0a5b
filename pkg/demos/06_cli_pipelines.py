"""End-to-end command-line pipelines on toy files.

Builds a FASTA file, an English-text file and an IP-address log in a temp
directory, then drives the installed CLI: tokenize-and-sketch, shard-and-
merge, fit, and estimate.  Every artifact is a real file you can inspect.
"""

import json
import subprocess
import sys
import tempfile
from pathlib import Path

from bnpsketch import sketch_load


def run(*args):
    cmd = [sys.executable, "-m", "bnpsketch.cli", *args]
    proc = subprocess.run(cmd, capture_output=True, text=True)
    if proc.returncode != 0:
        raise RuntimeError(f"{' '.join(cmd)} failed:\n{proc.stderr}")
    return proc.stdout


with tempfile.TemporaryDirectory() as tmp:
    tmp = Path(tmp)

    fasta = tmp / "genome.fa"
    fasta.write_text(">record1\nACGTACGTTTACGGA\n>record2\nGGACGTAACC\n")
    prose = tmp / "prose.txt"
    prose.write_text("The cat sat on the mat. The dog sat on the cat!\n")
    ips = tmp / "access.log"
    ips.write_text("".join(f"10.0.{i % 7}.{i % 13}\n" for i in range(400)))

    run("sketch", "--input", str(fasta), "--width", "64", "--seed", "1",
        "--tokenizer", "kmer:8", "--output", str(tmp / "kmers.sketch"))
    run("sketch", "--input", str(prose), "--width", "64", "--seed", "1",
        "--tokenizer", "ngram:2", "--output", str(tmp / "ngrams.sketch"))
    run("sketch", "--input", str(ips), "--width", "64", "--seed", "1",
        "--tokenizer", "lines", "--output", str(tmp / "ips.sketch"))
    for name in ("kmers", "ngrams", "ips"):
        s = sketch_load(tmp / f"{name}.sketch")
        print(f"{name:7}: n={s.n:4d} tokens into J={s.spec.width} buckets")

    # shard the IP log, sketch both halves, merge: identical to one pass
    lines = ips.read_text().splitlines(keepends=True)
    (tmp / "a.log").write_text("".join(lines[:200]))
    (tmp / "b.log").write_text("".join(lines[200:]))
    for part in ("a", "b"):
        run("sketch", "--input", str(tmp / f"{part}.log"), "--width", "64",
            "--seed", "1", "--tokenizer", "lines",
            "--output", str(tmp / f"{part}.sketch"))
    run("merge", str(tmp / "a.sketch"), str(tmp / "b.sketch"),
        "--output", str(tmp / "merged.sketch"))
    same = (tmp / "merged.sketch").read_bytes() == (tmp / "ips.sketch").read_bytes()
    print(f"merged shards equal the single-pass sketch: {same}")

    print("\nfit and estimate on the IP sketch:")
    print(run("fit", "--sketch", str(tmp / "ips.sketch"), "--fit", "eb-mle").strip())
    report = json.loads(
        run("estimate", "--sketch", str(tmp / "ips.sketch"), "--prior", "dp",
            "--fit", "eb-mle", "--r-max", "2")
    )
    print(f"missing mass estimate: {report['coverage']['0']:.4f}; "
          f"distinct-count estimate: {report['distinct']:.1f} (true distinct: 91)")
