import sys

from qdyn.cli import main

sys.exit(main())
