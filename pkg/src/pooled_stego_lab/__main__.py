# ======================================================================= #
#  Copyright (C) 2026 pooled-stego-lab contributors                       #
#                                                                         #
#  This file may be distributed under the terms of the GNU GPLv3 license  #
# ======================================================================= #
from .cli import main

if __name__ == "__main__":
    raise SystemExit(main())
