from geops.cli import main

main()
