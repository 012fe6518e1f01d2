#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "../common/harness.hpp"

TEST_CASE("fixed-value examples") {
  for (const auto& check : harness::trivial_examples()) {
    SUBCASE((check.module + ": " + check.name).c_str()) {
      INFO(check.module << ": " << check.name);
      try {
        check.run();
      } catch (const std::exception& e) {
        FAIL(e.what());
      }
    }
  }
}
