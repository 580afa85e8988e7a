import sys

from parallel_rewrite.__main__ import main

sys.exit(main())
