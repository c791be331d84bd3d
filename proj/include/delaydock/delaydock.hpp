#pragma once

// Umbrella header for the loop-delay docking-simulator analysis library.

#include "delaydock/plant.hpp"
#include "delaydock/cubic.hpp"
#include "delaydock/pade.hpp"
#include "delaydock/pole_location.hpp"
#include "delaydock/regions.hpp"
#include "delaydock/simulate.hpp"
#include "delaydock/emulate.hpp"
