"""
The command line
================

Every capability is reachable from ``avgctrl`` (or ``python3 -m avgctrl``),
which prints one JSON report per call.
"""

# %%
import json
import subprocess
import sys
from pathlib import Path

here = Path(__file__).parent


def avgctrl(*args):
    proc = subprocess.run([sys.executable, "-m", "avgctrl", *args], capture_output=True, text=True)
    return proc.returncode, proc.stdout


# %%
code, out = avgctrl("analyze", str(here / "fig1.txt"))
print(code, json.loads(out)["result"]["core"])

# %%
code, out = avgctrl("certify", str(here / "fig1.txt"))
print(code, json.loads(out)["result"]["rank_certificate"]["columns"])

# %%
# a generated failing pattern is refused by certify with exit code 3
code, text = avgctrl("generate", "--n", "4", "--qualifying", "false", "--seed", "3")
Path("gen.txt").write_text(text)
print(text)
code, out = avgctrl("certify", "gen.txt")
print(code, json.loads(out)["error"]["type"])

# %%
code, out = avgctrl("simulate", str(here / "fig1.txt"), "--target", "e9", "--time", "5", "--nodes", "32")
print(code, json.loads(out)["result"]["terminal_error"])
