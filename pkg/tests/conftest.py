import os
import sys

# make the in-tree oracle helpers importable from any rootdir
sys.path.insert(0, os.path.dirname(__file__))
