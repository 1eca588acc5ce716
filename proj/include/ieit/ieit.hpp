#pragma once

#include "ieit/model.hpp"
#include "ieit/response.hpp"
#include "ieit/steady_state.hpp"
#include "ieit/table.hpp"
#include "ieit/timedomain.hpp"
