#include "tweetner/cli.hpp"

int main(int argc, char** argv) { return tweetner::cli::run(argc, argv); }
