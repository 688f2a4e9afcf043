import sys

from shotnoise.cli import main

sys.exit(main())
