#pragma once

#include "converge.hpp"
#include "enumerate.hpp"
#include "error.hpp"
#include "exact_radical.hpp"
#include "kernel.hpp"
#include "limits.hpp"
#include "numbers.hpp"
#include "polyomino.hpp"
#include "roots.hpp"
#include "selftest.hpp"
#include "steps.hpp"
