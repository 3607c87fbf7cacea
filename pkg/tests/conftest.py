import sys

# deep blast certificates recurse past the default interpreter limit
sys.setrecursionlimit(40000)
