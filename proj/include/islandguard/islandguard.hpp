#ifndef ISLANDGUARD_ISLANDGUARD_HPP
#define ISLANDGUARD_ISLANDGUARD_HPP

#include "islandguard/config.hpp"
#include "islandguard/controller.hpp"
#include "islandguard/detection.hpp"
#include "islandguard/estimation.hpp"
#include "islandguard/io.hpp"
#include "islandguard/ndz.hpp"
#include "islandguard/plant.hpp"
#include "islandguard/scenarios.hpp"
#include "islandguard/signals.hpp"

#endif // ISLANDGUARD_ISLANDGUARD_HPP
