#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace tropprod {

struct RunConfig {
  std::string verb;
  int g = -1;
  int n = -1;
  std::vector<std::vector<long>> factors;
  std::string input;        // map type JSON for `image`
  std::string subdivision;  // subdivision JSON for `verify`
  bool unimodularize = false;
  int max_edges = -1;
  std::string format = "json";
  std::uint64_t seed = 0;
  bool timing = false;
};

// "2,-2" -> {2, -2}; throws InvalidInput.
std::vector<long> parse_slopes(const std::string& s);

// Exit status: 0 when every check in scope passes, 1 when a check fails
// (output is still written), 2 on malformed input.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

// Argument parsing followed by run().
int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace tropprod
