# Acceptance suites for the relations lab
