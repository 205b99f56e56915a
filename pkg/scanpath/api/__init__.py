# API router package
