# coding: utf-8
# # Record files and the command line
#
# Every sweep can be written as line-delimited JSON.  Two runs with the
# same settings give identical files once the timestamp and timings are
# dropped, which the digest helper checks.

# %%
import tempfile
from pathlib import Path

from tensor_denoise.cli import main
from tensor_denoise.records import file_digest, read_records

tmp = Path(tempfile.mkdtemp())
for name in ("a", "b"):
    main(["sweep-dim", "seeds=3", "d_list=2,3,4", "--out", str(tmp / name)])

print(file_digest(tmp / "a" / "records.jsonl") == file_digest(tmp / "b" / "records.jsonl"))
header, records = read_records(tmp / "a" / "records.jsonl")
header["config"]["seeds"], len(records)

# %%
# The same runs from a shell:
#   tensor-denoise sweep-dim seeds=20 --plots --out runs/dim
#   tensor-denoise sweep-rank format=tt --out runs/tt
#   tensor-denoise fit points=1:0.01,2:0.014,4:0.02
main(["fit", "points=1:0.01,2:0.014,4:0.02"])
