import sys

from bcsim.cli import main

sys.exit(main())
