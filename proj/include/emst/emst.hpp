#ifndef EMST_EMST_HPP
#define EMST_EMST_HPP

#include <emst/bvh.hpp>
#include <emst/data.hpp>
#include <emst/error.hpp>
#include <emst/geometry.hpp>
#include <emst/metric.hpp>
#include <emst/mst.hpp>
#include <emst/oracle.hpp>
#include <emst/parallel.hpp>

#endif
