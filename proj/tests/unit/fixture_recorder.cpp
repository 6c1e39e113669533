#define TBGEN_FIXTURE_RECORDER_NO_MAIN
#include "gen_microcorpus_fixtures.cpp"
