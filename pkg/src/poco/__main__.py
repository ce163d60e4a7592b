import sys

from poco.cli import main

sys.exit(main())
