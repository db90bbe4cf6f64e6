import sys

from disperse.main import main

sys.exit(main())
