# User Interface Package (command line and reports)
