#pragma once

#include "hetver/linalg.hpp"
#include "hetver/states.hpp"
#include "hetver/metrics.hpp"
#include "hetver/angle.hpp"
#include "hetver/circuit.hpp"
#include "hetver/measurement.hpp"
#include "hetver/tomography.hpp"
#include "hetver/protocols.hpp"
#include "hetver/qkd.hpp"
#include "hetver/reference.hpp"
#include "hetver/report.hpp"
