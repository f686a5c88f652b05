void bump ( int * acc , Counter & v ) {
  acc [ 0 ] = 0 ;
  acc [ 1 ] = 1 ;
  acc [ 2 ] = 2 ;
  acc [ 3 ] = 3 ;
  acc [ 4 ] = 4 ;
  acc [ 5 ] = 5 ;
  acc [ 6 ] = 6 ;
  acc [ 7 ] = 7 ;
  acc [ 8 ] = 8 ;
  acc [ 9 ] = 9 ;
  acc [ 10 ] = 10 ;
  acc [ 11 ] = 11 ;
  acc [ 12 ] = 12 ;
  acc [ 13 ] = 13 ;
  acc [ 14 ] = 14 ;
  acc [ 15 ] = 15 ;
  acc [ 16 ] = 16 ;
  acc [ 17 ] = 17 ;
  acc [ 18 ] = 18 ;
  v . fetch_add ( 1 ) ;
  v . fetch_add ( 2 ) ;
  v . fetch_add ( 3 ) ;
  acc [ 19 ] = 19 ;
  acc [ 20 ] = 20 ;
  acc [ 21 ] = 21 ;
  acc [ 22 ] = 22 ;
  acc [ 23 ] = 23 ;
  acc [ 24 ] = 24 ;
  acc [ 25 ] = 25 ;
  acc [ 26 ] = 26 ;
  acc [ 27 ] = 27 ;
  acc [ 28 ] = 28 ;
  acc [ 29 ] = 29 ;
  acc [ 30 ] = 30 ;
  acc [ 31 ] = 31 ;
  acc [ 32 ] = 32 ;
  acc [ 33 ] = 33 ;
  acc [ 34 ] = 34 ;
  acc [ 35 ] = 35 ;
  acc [ 36 ] = 36 ;
  acc [ 37 ] = 37 ;
}
