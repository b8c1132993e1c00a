import os
import sys

core_dir = os.environ.get("WATTOPS_CORE_DIR")
if core_dir:
    sys.path.insert(0, core_dir)
    here = os.path.dirname(os.path.abspath(__file__))
    sys.path.insert(0, os.path.join(here, "..", "..", "python"))
