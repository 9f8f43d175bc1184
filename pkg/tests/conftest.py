import sys

# explored state terms can nest a few thousand levels on adversarial inputs
sys.setrecursionlimit(20_000)
