#pragma once
namespace mgv::cli { int run(int argc, char** argv); }
