// Command-line front end: train, predict, evaluate, synth and gradcheck.

#ifndef MVRANK_CLI_H_
#define MVRANK_CLI_H_

#include <string>
#include <vector>

namespace mvrank {

// Exit codes: 0 success, 1 runtime failure (diagnostic on stderr),
// 2 usage error. Logging goes to stderr.
int RunCli(int argc, const char* const* argv);
int RunCli(const std::vector<std::string>& args);  // args exclude argv[0]

}  // namespace mvrank

#endif  // MVRANK_CLI_H_
