# ======================================================================= #
#  Copyright (C) 2026 pooled-stego-lab contributors                       #
#                                                                         #
#  This file may be distributed under the terms of the GNU GPLv3 license  #
# ======================================================================= #
import math
import re

# definition of a config override:
#  - the line MUST start with a dotted key - it is the option path
#    - every path segment MUST start with a letter or an underscore
#    - every path segment MAY contain letters, digits and underscores
#    - path segments MUST be separated by exactly one dot
#  - the key MUST be followed by an equal sign - it is the separator
#    - the separator MAY have any amount of leading or trailing whitespaces
#  - the separator MUST be followed by a value
#    - the value MAY be of any length and character
#    - the value MAY contain any amount of trailing whitespaces
OVERRIDE_RE = re.compile(r"^\s*([A-Za-z_]\w*(?:\.[A-Za-z_]\w*)*)\s*=\s*(\S.*?)\s*$")

# definition of a list value:
#  - the value MAY be wrapped in square brackets
#  - items MUST be separated by a comma
#  - items MAY have any amount of leading or trailing whitespaces
LIST_VALUE_RE = re.compile(r"^\[?(.*?)\]?$")

BOOLEAN_STATES = {
    "1": True,
    "yes": True,
    "true": True,
    "on": True,
    "0": False,
    "no": False,
    "false": False,
    "off": False,
}

LOG2_3 = math.log2(3.0)

# embedding simulator
LAMBDA_LO = 1e-12
LAMBDA_HI_START = 1.0
LAMBDA_CAP = 2.0**80
MAX_BISECTION_STEPS = 200
SOLVER_RTOL = 1e-9
SOLVER_ATOL = 1e-12

# spreading
GREEDY_BPC_CAP = 1.0
DEFAULT_BETA = 0.5
CAPACITY_RTOL = 1e-12
LEVEL_RTOL = 1e-8

# seed mixing tags, one per independent stream family
TAG_IMAGE = 0x11
TAG_BAG = 0x22
TAG_ORDER = 0x33
TAG_SID_BETWEEN = 0x44
TAG_SID_WITHIN = 0x55
TAG_DATASET = 0x66
TAG_COVER_BAG = 0x77
TAG_STEGO_BAG = 0x88
TAG_SCORE = 0x99

SPLITS = ("train", "test")
POOLINGS = ("disc", "clair", "mean", "max")
POOL_DOMAINS = ("scores", "histogram")
LABELS = ("cover", "stego")

SCORE_CSV_HEADER = ["bag_id", "image_id", "score", "label", "strategy", "rate_bpc"]
ALLOCATION_CSV_HEADER = ["bag_id", "image_id", "bits", "strategy"]
BAG_CSV_HEADER = [
    "bag_id",
    "image_id",
    "n_coeffs",
    "cost_mean",
    "variance_mean",
    "cost_offset",
]
REPORT_CSV_HEADER = ["pooling", "strategy", "bag_size", "pe_mean", "pe_var", "pe_runs"]
# strategy label of the per-pooling average over all strategies
STRATEGY_AVERAGE = "average"

# P_e gaps observed on real images, echoed in report metadata for comparison
REFERENCE_GAP_DISC_TO_MEAN_MAX = 0.02
REFERENCE_GAP_DISC_TO_CLAIR = 0.008
