#pragma once

#include <doctest.h>

#include "properties.hpp"

// Runs every property suite registered for a module as doctest subcases.
inline void run_module_properties(const std::string& module) {
    for (const auto& s : abelu::props::suites()) {
        if (s.module != module) continue;
        SUBCASE(s.name.c_str()) {
            auto r = abelu::props::run_suite(s);
            INFO(r.first_failure);
            CHECK(r.failures == 0);
        }
    }
}
