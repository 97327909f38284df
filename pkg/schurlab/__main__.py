"""python -m schurlab"""

import sys

from .main import main

sys.exit(main())
