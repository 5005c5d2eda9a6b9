"""python -m themealign"""

import sys

from .main import main

sys.exit(main())
