#pragma once

#include "aabb.hpp"
#include "bounds.hpp"
#include "brute_force.hpp"
#include "common.hpp"
#include "dfs_baseline.hpp"
#include "f12_bvh.hpp"
#include "mesh.hpp"
#include "morton.hpp"
#include "obj_io.hpp"
#include "parallel.hpp"
#include "query.hpp"
#include "report.hpp"
#include "scene.hpp"
#include "triangle_distance.hpp"
