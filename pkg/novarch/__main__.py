from novarch.cli import main

main()
